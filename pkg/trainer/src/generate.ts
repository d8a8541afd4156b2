/**
 * Batch generation over an emitted corpus file: decode each record's input
 * and write a predictions file the toolkit's `parse` subcommand accepts.
 * Decoding is greedy by default; wider beams are available behind a flag.
 */

import { Seq2SeqModel } from "./model";
import { CorpusRecord, PredictionRecord } from "./schema";

export interface GenerateOptions {
  maxSequenceLength: number;
  beamWidth: number;
}

export function generatePredictions(
  model: Seq2SeqModel,
  records: CorpusRecord[],
  options: GenerateOptions,
): PredictionRecord[] {
  return records.map((r) => {
    const inputIds = model.tokenizer.encode(r.input, options.maxSequenceLength);
    const outputIds = model.generate(inputIds, options.maxSequenceLength, options.beamWidth);
    return { id: r.id, task: r.task, generated: model.tokenizer.decode(outputIds) };
  });
}
