/**
 * splitmix64 stream, the same generator the toolkit pins in its determinism
 * notes, so seeds behave identically on both sides of the file boundary.
 */

const MASK = (1n << 64n) - 1n;
const GAMMA = 0x9e3779b97f4a7c15n;

export class Rng {
  private state: bigint;

  constructor(seed: number | bigint) {
    const s = BigInt(seed);
    if (s < 0n || s > MASK) {
      throw new Error(`seed must be an unsigned 64-bit integer, got ${seed}`);
    }
    this.state = s;
  }

  nextU64(): bigint {
    this.state = (this.state + GAMMA) & MASK;
    let z = this.state;
    z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK;
    z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK;
    return z ^ (z >> 31n);
  }

  /** Uniform integer in [0, n), rejection-sampled (no modulo bias). */
  randrange(n: number): number {
    if (n <= 0) throw new Error(`randrange bound must be positive, got ${n}`);
    const bound = BigInt(n);
    const limit = (1n << 64n) - ((1n << 64n) % bound);
    for (;;) {
      const v = this.nextU64();
      if (v < limit) return Number(v % bound);
    }
  }

  /** Uniform float in [0, 1) using the top 53 bits. */
  nextFloat(): number {
    return Number(this.nextU64() >> 11n) / 2 ** 53;
  }

  /** Standard normal via Box-Muller. */
  nextGaussian(): number {
    let u = 0;
    while (u === 0) u = this.nextFloat();
    const v = this.nextFloat();
    return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
  }

  /** In-place Fisher-Yates shuffle, top index down. */
  shuffle<T>(items: T[]): void {
    for (let i = items.length - 1; i > 0; i--) {
      const j = this.randrange(i + 1);
      [items[i], items[j]] = [items[j], items[i]];
    }
  }
}
