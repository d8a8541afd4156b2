#!/usr/bin/env node
/**
 * absa-trainer: train | generate | run
 *
 *   train    --corpus train.jsonl --model model.json [--loss-log losses.jsonl]
 *            [--config config.json] [--seed N] [--epochs N] [--batch-size N]
 *            [--learning-rate X] [--model-size tiny|small] [--k 5|10|20|50|full]
 *   generate --model model.json --corpus eval.jsonl --out preds.jsonl [--beam N]
 *   run      train + generate in one go (--corpus, --generate-on, --out, ...)
 *
 * Exit codes: 0 success, 1 data/schema errors, 2 usage errors.
 */

import { DEFAULT_CONFIG, TrainerConfig, batchSizeForK, loadConfig } from "./config";
import { generatePredictions } from "./generate";
import { SchemaError, readCorpus, writePredictions } from "./schema";
import { readModel, trainModel, writeModel } from "./trainer";

type Flags = Record<string, string>;

function parseFlags(argv: string[]): Flags {
  const flags: Flags = {};
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) {
      throw new UsageError(`unexpected argument: ${arg}`);
    }
    const key = arg.slice(2);
    const value = argv[i + 1];
    if (value === undefined || value.startsWith("--")) {
      throw new UsageError(`flag --${key} needs a value`);
    }
    flags[key] = value;
    i++;
  }
  return flags;
}

class UsageError extends Error {}

function need(flags: Flags, key: string): string {
  const v = flags[key];
  if (v === undefined) throw new UsageError(`missing required flag --${key}`);
  return v;
}

function configFrom(flags: Flags): TrainerConfig {
  const overrides: Partial<TrainerConfig> = {};
  if (flags["seed"] !== undefined) overrides.seed = Number(flags["seed"]);
  if (flags["epochs"] !== undefined) overrides.epochs = Number(flags["epochs"]);
  if (flags["batch-size"] !== undefined) overrides.batchSize = Number(flags["batch-size"]);
  else if (flags["k"] !== undefined) {
    overrides.batchSize = batchSizeForK(flags["k"] === "full" ? "full" : Number(flags["k"]));
  }
  if (flags["learning-rate"] !== undefined) overrides.learningRate = Number(flags["learning-rate"]);
  if (flags["model-size"] !== undefined) overrides.modelSize = flags["model-size"];
  if (flags["max-length"] !== undefined) overrides.maxSequenceLength = Number(flags["max-length"]);
  return loadConfig(flags["config"], overrides);
}

function cmdTrain(flags: Flags): number {
  const config = configFrom(flags);
  const corpus = readCorpus(need(flags, "corpus"));
  const result = trainModel(corpus.records, config);
  writeModel(result, need(flags, "model"), flags["loss-log"]);
  const first = result.losses[0].toFixed(4);
  const last = result.losses[result.losses.length - 1].toFixed(4);
  console.log(
    `trained ${config.epochs} epochs on ${corpus.records.length} records ` +
      `(lr=${config.learningRate}, batch=${config.batchSize}); loss ${first} -> ${last}`,
  );
  return 0;
}

function cmdGenerate(flags: Flags): number {
  const model = readModel(need(flags, "model"));
  const corpus = readCorpus(need(flags, "corpus"));
  const beamWidth = flags["beam"] !== undefined ? Number(flags["beam"]) : 1;
  const maxLen = flags["max-length"] !== undefined ? Number(flags["max-length"]) : DEFAULT_CONFIG.maxSequenceLength;
  const predictions = generatePredictions(model, corpus.records, {
    maxSequenceLength: maxLen,
    beamWidth,
  });
  writePredictions(predictions, need(flags, "out"));
  console.log(`generated ${predictions.length} predictions (beam=${beamWidth})`);
  return 0;
}

function cmdRun(flags: Flags): number {
  const modelPath = flags["model"] ?? need(flags, "out") + ".model.json";
  const trainRc = cmdTrain({ ...flags, model: modelPath });
  if (trainRc !== 0) return trainRc;
  const generateOn = flags["generate-on"] ?? need(flags, "corpus");
  return cmdGenerate({ ...flags, model: modelPath, corpus: generateOn });
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    const flags = parseFlags(rest);
    switch (command) {
      case "train":
        return cmdTrain(flags);
      case "generate":
        return cmdGenerate(flags);
      case "run":
        return cmdRun(flags);
      default:
        throw new UsageError(`unknown command: ${command ?? "(none)"} (expected train, generate or run)`);
    }
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`absa-trainer: ${err.message}`);
      return 2;
    }
    if (err instanceof SchemaError || (err instanceof Error && err.message.includes("ENOENT"))) {
      console.error(`absa-trainer: ${err instanceof Error ? err.message : err}`);
      return 1;
    }
    if (err instanceof Error) {
      console.error(`absa-trainer: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
