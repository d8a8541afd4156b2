/**
 * Line-delimited file contracts shared with the absa-forge toolkit.
 *
 * Corpora arrive as `absa-forge/corpus/v1` (schema header on line 1, then
 * one {id, task, template_index, input, target} record per line); predictions
 * leave as `absa-forge/predictions/v1` records {id, task, generated}.
 */

import * as fs from "node:fs";

export const CORPUS_SCHEMA = "absa-forge/corpus/v1";
export const PREDICTIONS_SCHEMA = "absa-forge/predictions/v1";

export interface CorpusRecord {
  id: string;
  task: string;
  template_index: number;
  input: string;
  target: string;
}

export interface CorpusFile {
  header: Record<string, unknown>;
  records: CorpusRecord[];
}

export class SchemaError extends Error {}

export function readCorpus(path: string): CorpusFile {
  const lines = fs
    .readFileSync(path, "utf-8")
    .split("\n")
    .filter((l) => l.trim().length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${path}: empty file, expected schema header`);
  }
  let header: Record<string, unknown>;
  try {
    header = JSON.parse(lines[0]);
  } catch (err) {
    throw new SchemaError(`${path}: bad header line: ${err}`);
  }
  if (header === null || typeof header !== "object" || header["schema"] !== CORPUS_SCHEMA) {
    throw new SchemaError(
      `${path}: expected schema ${JSON.stringify(CORPUS_SCHEMA)}, got ${JSON.stringify(header?.["schema"])}`,
    );
  }
  const records: CorpusRecord[] = [];
  for (let i = 1; i < lines.length; i++) {
    let obj: Record<string, unknown>;
    try {
      obj = JSON.parse(lines[i]);
    } catch (err) {
      throw new SchemaError(`${path}: line ${i + 1}: bad record: ${err}`);
    }
    if (typeof obj["input"] !== "string" || typeof obj["target"] !== "string") {
      throw new SchemaError(`${path}: line ${i + 1}: record needs string input and target`);
    }
    records.push({
      id: String(obj["id"]),
      task: String(obj["task"]),
      template_index: Number(obj["template_index"] ?? -1),
      input: obj["input"],
      target: obj["target"],
    });
  }
  if (records.length === 0) {
    throw new SchemaError(`${path}: corpus has no records`);
  }
  return { header, records };
}

export interface PredictionRecord {
  id: string;
  task: string;
  generated: string;
}

export function writePredictions(records: PredictionRecord[], path: string): void {
  const lines = [JSON.stringify({ schema: PREDICTIONS_SCHEMA })];
  for (const r of records) {
    lines.push(JSON.stringify({ id: r.id, task: r.task, generated: r.generated }));
  }
  fs.writeFileSync(path, lines.join("\n") + "\n", "utf-8");
}
