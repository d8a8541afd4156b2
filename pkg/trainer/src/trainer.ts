/**
 * Training loop: mean token-level negative log-likelihood of each target
 * given its transformed input, averaged within a batch, optimized with AdamW.
 * Consuming the emitted multi-task file sequentially realizes the uniform
 * task mixture, since every task contributes exactly one record per example.
 */

import * as fs from "node:fs";

import { AdamW, backward } from "./autograd";
import { TrainerConfig } from "./config";
import { SIZE_TAGS, Seq2SeqModel } from "./model";
import { Rng } from "./rand";
import { CorpusRecord } from "./schema";
import { Tokenizer } from "./tokenizer";

export interface TrainResult {
  model: Seq2SeqModel;
  losses: number[]; // mean loss per epoch
}

export function trainModel(records: CorpusRecord[], config: TrainerConfig): TrainResult {
  const dims = SIZE_TAGS[config.modelSize];
  if (!dims) {
    throw new Error(`unknown model size tag: ${config.modelSize} (have ${Object.keys(SIZE_TAGS).join(", ")})`);
  }
  const tokenizer = Tokenizer.fromTexts(records.flatMap((r) => [r.input, r.target]));
  const rng = new Rng(config.seed);
  const model = Seq2SeqModel.initialized(tokenizer, dims, rng);
  const optimizer = new AdamW(model.parameters(), {
    learningRate: config.learningRate,
    weightDecay: config.weightDecay,
  });

  const encoded = records.map((r) => ({
    input: tokenizer.encode(r.input, config.maxSequenceLength),
    target: tokenizer.encode(r.target, config.maxSequenceLength),
  }));

  const losses: number[] = [];
  for (let epoch = 0; epoch < config.epochs; epoch++) {
    const order = [...encoded.keys()];
    rng.shuffle(order);
    let epochLoss = 0;
    for (let start = 0; start < order.length; start += config.batchSize) {
      const batch = order.slice(start, start + config.batchSize);
      optimizer.zeroGrad();
      for (const idx of batch) {
        const { input, target } = encoded[idx];
        const loss = model.loss(input, target);
        backward(loss, 1 / batch.length); // sequences accumulate to a batch mean
        epochLoss += loss.data[0];
      }
      optimizer.clipGradNorm(config.clipNorm);
      optimizer.step();
    }
    losses.push(epochLoss / encoded.length);
  }
  return { model, losses };
}

export function writeModel(result: TrainResult, modelPath: string, lossPath?: string): void {
  fs.writeFileSync(modelPath, JSON.stringify(result.model.toJSON()) + "\n", "utf-8");
  if (lossPath) {
    const lines = result.losses.map((loss, epoch) => JSON.stringify({ epoch: epoch + 1, loss }));
    fs.writeFileSync(lossPath, lines.join("\n") + "\n", "utf-8");
  }
}

export function readModel(path: string): Seq2SeqModel {
  return Seq2SeqModel.fromJSON(JSON.parse(fs.readFileSync(path, "utf-8")));
}
