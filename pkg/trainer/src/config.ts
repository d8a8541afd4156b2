/**
 * Trainer configuration. The defaults are the pinned desk-scale recipe:
 * learning rate 3e-4, 20 epochs, maximum sequence length 160 (longer
 * sequences truncated), Adam with decoupled weight decay, and per-k batch
 * sizes of 2/2/4/8 for k = 5/10/20/50 (16 for full-data runs).
 */

import * as fs from "node:fs";

export interface TrainerConfig {
  modelSize: string;
  learningRate: number;
  epochs: number;
  batchSize: number;
  maxSequenceLength: number;
  optimizer: "adamw";
  weightDecay: number;
  clipNorm: number;
  seed: number;
}

export const BATCH_SIZE_BY_K: Record<string, number> = {
  "5": 2,
  "10": 2,
  "20": 4,
  "50": 8,
  full: 16,
};

export const DEFAULT_CONFIG: TrainerConfig = {
  modelSize: "small",
  learningRate: 3e-4,
  epochs: 20,
  batchSize: BATCH_SIZE_BY_K["5"],
  maxSequenceLength: 160,
  optimizer: "adamw",
  weightDecay: 0.01,
  clipNorm: 5,
  seed: 0,
};

export function batchSizeForK(k: number | "full"): number {
  const value = BATCH_SIZE_BY_K[String(k)];
  if (value === undefined) {
    throw new Error(`no pinned batch size for k=${k}; pass batchSize explicitly`);
  }
  return value;
}

export function loadConfig(path?: string, overrides: Partial<TrainerConfig> = {}): TrainerConfig {
  let fromFile: Partial<TrainerConfig> = {};
  if (path) {
    fromFile = JSON.parse(fs.readFileSync(path, "utf-8"));
  }
  const config = { ...DEFAULT_CONFIG, ...fromFile, ...overrides };
  if (config.optimizer !== "adamw") {
    throw new Error(`unsupported optimizer: ${config.optimizer}`);
  }
  if (config.epochs <= 0 || config.batchSize <= 0 || config.maxSequenceLength <= 0) {
    throw new Error("epochs, batchSize and maxSequenceLength must be positive");
  }
  return config;
}
