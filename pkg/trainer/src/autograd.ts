/**
 * Minimal reverse-mode autodiff over dense 2-D float64 matrices; just the
 * operations a small recurrent encoder-decoder needs. Backward closures are
 * only recorded while gradients are enabled, so decoding is allocation-light.
 */

let gradEnabled = true;

export function withNoGrad<T>(fn: () => T): T {
  const prev = gradEnabled;
  gradEnabled = false;
  try {
    return fn();
  } finally {
    gradEnabled = prev;
  }
}

export class Tensor {
  readonly rows: number;
  readonly cols: number;
  readonly data: Float64Array;
  grad: Float64Array | null = null;
  readonly requiresGrad: boolean;
  parents: Tensor[] = [];
  backwardFn: (() => void) | null = null;

  constructor(rows: number, cols: number, data?: Float64Array, requiresGrad = false) {
    this.rows = rows;
    this.cols = cols;
    this.data = data ?? new Float64Array(rows * cols);
    if (this.data.length !== rows * cols) {
      throw new Error(`data length ${this.data.length} != ${rows}x${cols}`);
    }
    this.requiresGrad = requiresGrad;
  }

  get size(): number {
    return this.rows * this.cols;
  }

  ensureGrad(): Float64Array {
    if (this.grad === null) this.grad = new Float64Array(this.size);
    return this.grad;
  }

  zeroGrad(): void {
    if (this.grad !== null) this.grad.fill(0);
  }
}

function track(out: Tensor, parents: Tensor[], backwardFn: () => void): Tensor {
  if (gradEnabled && parents.some((p) => p.requiresGrad || p.backwardFn !== null)) {
    out.parents = parents;
    out.backwardFn = backwardFn;
  }
  return out;
}

export function param(rows: number, cols: number, init: (i: number) => number): Tensor {
  const t = new Tensor(rows, cols, undefined, true);
  for (let i = 0; i < t.size; i++) t.data[i] = init(i);
  return t;
}

export function matmul(a: Tensor, b: Tensor): Tensor {
  if (a.cols !== b.rows) throw new Error(`matmul shape mismatch ${a.cols} vs ${b.rows}`);
  const out = new Tensor(a.rows, b.cols);
  for (let i = 0; i < a.rows; i++) {
    for (let k = 0; k < a.cols; k++) {
      const av = a.data[i * a.cols + k];
      if (av === 0) continue;
      for (let j = 0; j < b.cols; j++) {
        out.data[i * b.cols + j] += av * b.data[k * b.cols + j];
      }
    }
  }
  return track(out, [a, b], () => {
    const og = out.grad!;
    if (a.requiresGrad || a.backwardFn) {
      const ag = a.ensureGrad();
      for (let i = 0; i < a.rows; i++) {
        for (let j = 0; j < b.cols; j++) {
          const g = og[i * b.cols + j];
          if (g === 0) continue;
          for (let k = 0; k < a.cols; k++) {
            ag[i * a.cols + k] += g * b.data[k * b.cols + j];
          }
        }
      }
    }
    if (b.requiresGrad || b.backwardFn) {
      const bg = b.ensureGrad();
      for (let i = 0; i < a.rows; i++) {
        for (let k = 0; k < a.cols; k++) {
          const av = a.data[i * a.cols + k];
          if (av === 0) continue;
          for (let j = 0; j < b.cols; j++) {
            bg[k * b.cols + j] += av * og[i * b.cols + j];
          }
        }
      }
    }
  });
}

function zipSameShape(a: Tensor, b: Tensor, f: (x: number, y: number) => number): Tensor {
  if (a.rows !== b.rows || a.cols !== b.cols) throw new Error("shape mismatch");
  const out = new Tensor(a.rows, a.cols);
  for (let i = 0; i < out.size; i++) out.data[i] = f(a.data[i], b.data[i]);
  return out;
}

export function add(a: Tensor, b: Tensor): Tensor {
  const out = zipSameShape(a, b, (x, y) => x + y);
  return track(out, [a, b], () => {
    const og = out.grad!;
    if (a.requiresGrad || a.backwardFn) {
      const ag = a.ensureGrad();
      for (let i = 0; i < og.length; i++) ag[i] += og[i];
    }
    if (b.requiresGrad || b.backwardFn) {
      const bg = b.ensureGrad();
      for (let i = 0; i < og.length; i++) bg[i] += og[i];
    }
  });
}

export function mul(a: Tensor, b: Tensor): Tensor {
  const out = zipSameShape(a, b, (x, y) => x * y);
  return track(out, [a, b], () => {
    const og = out.grad!;
    if (a.requiresGrad || a.backwardFn) {
      const ag = a.ensureGrad();
      for (let i = 0; i < og.length; i++) ag[i] += og[i] * b.data[i];
    }
    if (b.requiresGrad || b.backwardFn) {
      const bg = b.ensureGrad();
      for (let i = 0; i < og.length; i++) bg[i] += og[i] * a.data[i];
    }
  });
}

export function oneMinus(a: Tensor): Tensor {
  const out = new Tensor(a.rows, a.cols);
  for (let i = 0; i < a.size; i++) out.data[i] = 1 - a.data[i];
  return track(out, [a], () => {
    const og = out.grad!;
    const ag = a.ensureGrad();
    for (let i = 0; i < og.length; i++) ag[i] -= og[i];
  });
}

export function sigmoid(a: Tensor): Tensor {
  const out = new Tensor(a.rows, a.cols);
  for (let i = 0; i < a.size; i++) out.data[i] = 1 / (1 + Math.exp(-a.data[i]));
  return track(out, [a], () => {
    const og = out.grad!;
    const ag = a.ensureGrad();
    for (let i = 0; i < og.length; i++) {
      const y = out.data[i];
      ag[i] += og[i] * y * (1 - y);
    }
  });
}

export function tanh(a: Tensor): Tensor {
  const out = new Tensor(a.rows, a.cols);
  for (let i = 0; i < a.size; i++) out.data[i] = Math.tanh(a.data[i]);
  return track(out, [a], () => {
    const og = out.grad!;
    const ag = a.ensureGrad();
    for (let i = 0; i < og.length; i++) {
      const y = out.data[i];
      ag[i] += og[i] * (1 - y * y);
    }
  });
}

/** Row i of an embedding matrix as a [1, cols] tensor; grads scatter back. */
export function embeddingRow(table: Tensor, index: number): Tensor {
  if (index < 0 || index >= table.rows) throw new Error(`row ${index} out of range`);
  const out = new Tensor(1, table.cols);
  out.data.set(table.data.subarray(index * table.cols, (index + 1) * table.cols));
  return track(out, [table], () => {
    const og = out.grad!;
    const tg = table.ensureGrad();
    for (let j = 0; j < table.cols; j++) tg[index * table.cols + j] += og[j];
  });
}

/** Concatenate [1, n_i] tensors into [1, sum(n_i)]. */
export function concatCols(parts: Tensor[]): Tensor {
  const cols = parts.reduce((n, p) => n + p.cols, 0);
  const out = new Tensor(1, cols);
  let offset = 0;
  for (const p of parts) {
    if (p.rows !== 1) throw new Error("concatCols expects row vectors");
    out.data.set(p.data, offset);
    offset += p.cols;
  }
  return track(out, parts, () => {
    const og = out.grad!;
    let off = 0;
    for (const p of parts) {
      if (p.requiresGrad || p.backwardFn) {
        const pg = p.ensureGrad();
        for (let j = 0; j < p.cols; j++) pg[j] += og[off + j];
      }
      off += p.cols;
    }
  });
}

/** Dot product of two row vectors, as a [1,1] tensor. */
export function dot(a: Tensor, b: Tensor): Tensor {
  if (a.rows !== 1 || b.rows !== 1 || a.cols !== b.cols) throw new Error("dot shape mismatch");
  const out = new Tensor(1, 1);
  let s = 0;
  for (let i = 0; i < a.cols; i++) s += a.data[i] * b.data[i];
  out.data[0] = s;
  return track(out, [a, b], () => {
    const g = out.grad![0];
    if (a.requiresGrad || a.backwardFn) {
      const ag = a.ensureGrad();
      for (let i = 0; i < a.cols; i++) ag[i] += g * b.data[i];
    }
    if (b.requiresGrad || b.backwardFn) {
      const bg = b.ensureGrad();
      for (let i = 0; i < b.cols; i++) bg[i] += g * a.data[i];
    }
  });
}

/** Softmax over a [1, n] row. */
export function softmaxRow(a: Tensor): Tensor {
  if (a.rows !== 1) throw new Error("softmaxRow expects a row vector");
  const out = new Tensor(1, a.cols);
  let max = -Infinity;
  for (let i = 0; i < a.cols; i++) max = Math.max(max, a.data[i]);
  let sum = 0;
  for (let i = 0; i < a.cols; i++) {
    out.data[i] = Math.exp(a.data[i] - max);
    sum += out.data[i];
  }
  for (let i = 0; i < a.cols; i++) out.data[i] /= sum;
  return track(out, [a], () => {
    const og = out.grad!;
    const ag = a.ensureGrad();
    let dotVal = 0;
    for (let i = 0; i < a.cols; i++) dotVal += og[i] * out.data[i];
    for (let i = 0; i < a.cols; i++) ag[i] += out.data[i] * (og[i] - dotVal);
  });
}

/** weights [1, T] times a list of T row vectors [1, H] -> [1, H]. */
export function weightedSum(weights: Tensor, rows: Tensor[]): Tensor {
  if (weights.rows !== 1 || weights.cols !== rows.length) throw new Error("weightedSum shape mismatch");
  const cols = rows[0].cols;
  const out = new Tensor(1, cols);
  for (let t = 0; t < rows.length; t++) {
    const w = weights.data[t];
    for (let j = 0; j < cols; j++) out.data[j] += w * rows[t].data[j];
  }
  return track(out, [weights, ...rows], () => {
    const og = out.grad!;
    if (weights.requiresGrad || weights.backwardFn) {
      const wg = weights.ensureGrad();
      for (let t = 0; t < rows.length; t++) {
        let s = 0;
        for (let j = 0; j < cols; j++) s += og[j] * rows[t].data[j];
        wg[t] += s;
      }
    }
    for (let t = 0; t < rows.length; t++) {
      const r = rows[t];
      if (r.requiresGrad || r.backwardFn) {
        const rg = r.ensureGrad();
        const w = weights.data[t];
        for (let j = 0; j < cols; j++) rg[j] += w * og[j];
      }
    }
  });
}

/** Cross-entropy of a [1, V] logits row against a target index, as [1,1]. */
export function crossEntropyLogits(logits: Tensor, target: number): Tensor {
  if (logits.rows !== 1) throw new Error("crossEntropyLogits expects a row vector");
  if (target < 0 || target >= logits.cols) throw new Error("target out of range");
  let max = -Infinity;
  for (let i = 0; i < logits.cols; i++) max = Math.max(max, logits.data[i]);
  let sum = 0;
  for (let i = 0; i < logits.cols; i++) sum += Math.exp(logits.data[i] - max);
  const logZ = max + Math.log(sum);
  const out = new Tensor(1, 1);
  out.data[0] = logZ - logits.data[target];
  return track(out, [logits], () => {
    const g = out.grad![0];
    const lg = logits.ensureGrad();
    for (let i = 0; i < logits.cols; i++) {
      const p = Math.exp(logits.data[i] - logZ);
      lg[i] += g * (p - (i === target ? 1 : 0));
    }
  });
}

export function scale(a: Tensor, c: number): Tensor {
  const out = new Tensor(a.rows, a.cols);
  for (let i = 0; i < a.size; i++) out.data[i] = a.data[i] * c;
  return track(out, [a], () => {
    const og = out.grad!;
    const ag = a.ensureGrad();
    for (let i = 0; i < og.length; i++) ag[i] += og[i] * c;
  });
}

export function sum(parts: Tensor[]): Tensor {
  let acc = parts[0];
  for (let i = 1; i < parts.length; i++) acc = add(acc, parts[i]);
  return acc;
}

/** Reverse-mode sweep from a scalar loss; ``seed`` scales every gradient,
 * which lets per-sequence sweeps accumulate into a batch average. */
export function backward(loss: Tensor, seed = 1): void {
  if (loss.size !== 1) throw new Error("backward expects a scalar");
  // iterative post-order DFS; graph depth grows with sequence length
  const topo: Tensor[] = [];
  const seen = new Set<Tensor>();
  const stack: Array<[Tensor, number]> = [[loss, 0]];
  while (stack.length > 0) {
    const top = stack[stack.length - 1];
    const [node, next] = top;
    if (next < node.parents.length) {
      top[1] += 1;
      const parent = node.parents[next];
      if (!seen.has(parent)) {
        seen.add(parent);
        stack.push([parent, 0]);
      }
    } else {
      stack.pop();
      topo.push(node);
    }
  }
  loss.ensureGrad()[0] = seed;
  for (let i = topo.length - 1; i >= 0; i--) {
    const t = topo[i];
    if (t.backwardFn !== null && t.grad !== null) t.backwardFn();
  }
}

export interface AdamWOptions {
  learningRate: number;
  weightDecay: number;
  beta1?: number;
  beta2?: number;
  epsilon?: number;
}

/** Adam with decoupled weight decay. */
export class AdamW {
  private readonly params: Tensor[];
  private readonly m: Float64Array[];
  private readonly v: Float64Array[];
  private readonly opts: Required<AdamWOptions>;
  private step_ = 0;

  constructor(params: Tensor[], opts: AdamWOptions) {
    this.params = params;
    this.m = params.map((p) => new Float64Array(p.size));
    this.v = params.map((p) => new Float64Array(p.size));
    // beta2 0.9: the second moment adapts within tens of steps, which suits
    // the few-hundred-step schedules this trainer runs
    this.opts = { beta1: 0.9, beta2: 0.9, epsilon: 1e-8, ...opts };
  }

  /** Global-norm gradient clip; returns the pre-clip norm. */
  clipGradNorm(maxNorm: number): number {
    let total = 0;
    for (const p of this.params) {
      if (p.grad === null) continue;
      for (let i = 0; i < p.size; i++) total += p.grad[i] * p.grad[i];
    }
    const norm = Math.sqrt(total);
    if (maxNorm > 0 && norm > maxNorm) {
      const s = maxNorm / (norm + 1e-12);
      for (const p of this.params) {
        if (p.grad === null) continue;
        for (let i = 0; i < p.size; i++) p.grad[i] *= s;
      }
    }
    return norm;
  }

  step(): void {
    this.step_ += 1;
    const { learningRate, weightDecay, beta1, beta2, epsilon } = this.opts;
    const bc1 = 1 - Math.pow(beta1, this.step_);
    const bc2 = 1 - Math.pow(beta2, this.step_);
    for (let k = 0; k < this.params.length; k++) {
      const p = this.params[k];
      if (p.grad === null) continue;
      const m = this.m[k];
      const v = this.v[k];
      for (let i = 0; i < p.size; i++) {
        const g = p.grad[i];
        m[i] = beta1 * m[i] + (1 - beta1) * g;
        v[i] = beta2 * v[i] + (1 - beta2) * g * g;
        const mHat = m[i] / bc1;
        const vHat = v[i] / bc2;
        p.data[i] -= learningRate * (mHat / (Math.sqrt(vHat) + epsilon) + weightDecay * p.data[i]);
      }
    }
  }

  zeroGrad(): void {
    for (const p of this.params) p.zeroGrad();
  }
}
