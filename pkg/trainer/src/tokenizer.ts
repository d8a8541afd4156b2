/**
 * Word-level tokenizer built from the corpus itself. Sequences longer than
 * the maximum length are truncated; shorter ones need no padding because the
 * model consumes sequences one at a time.
 */

export const PAD = "<pad>";
export const BOS = "<bos>";
export const EOS = "<eos>";
export const UNK = "<unk>";

export class Tokenizer {
  readonly vocab: string[];
  private index: Map<string, number>;

  constructor(vocab: string[]) {
    this.vocab = vocab;
    this.index = new Map(vocab.map((w, i) => [w, i]));
    for (const special of [PAD, BOS, EOS, UNK]) {
      if (!this.index.has(special)) {
        throw new Error(`vocab is missing ${special}`);
      }
    }
  }

  static fromTexts(texts: string[]): Tokenizer {
    const words = new Set<string>();
    for (const text of texts) {
      for (const w of text.split(/\s+/)) {
        if (w.length > 0) words.add(w);
      }
    }
    return new Tokenizer([PAD, BOS, EOS, UNK, ...[...words].sort()]);
  }

  get size(): number {
    return this.vocab.length;
  }

  get bosId(): number {
    return this.index.get(BOS)!;
  }

  get eosId(): number {
    return this.index.get(EOS)!;
  }

  /** Token ids without specials, truncated to maxLen. */
  encode(text: string, maxLen: number): number[] {
    const unk = this.index.get(UNK)!;
    const ids: number[] = [];
    for (const w of text.split(/\s+/)) {
      if (w.length === 0) continue;
      if (ids.length >= maxLen) break;
      ids.push(this.index.get(w) ?? unk);
    }
    return ids;
  }

  decode(ids: number[]): string {
    const skip = new Set([this.index.get(PAD)!, this.bosId, this.eosId]);
    return ids
      .filter((i) => !skip.has(i))
      .map((i) => this.vocab[i] ?? UNK)
      .join(" ");
  }
}
