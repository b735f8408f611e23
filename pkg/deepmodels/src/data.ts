/**
 * Loading of extraction directories produced by the airwriting CLI:
 * features.myot / labels.myot / folds.tsv / run.json.
 *
 * Envelope tensors arrive as (n, channels, frames) and are served to the
 * models time-major as (n, frames, channels); time-frequency tensors arrive
 * as (n, channels, bins, frames) and become (n, bins, frames, channels).
 */

import { readFileSync } from "node:fs";
import { join } from "node:path";

import * as tf from "@tensorflow/tfjs";

import { readTensorFile } from "./tensorfile.js";

export const LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
export const N_CLASSES = 26;

export interface Dataset {
  features: tf.Tensor;
  labels: Int32Array;
  folds: Int32Array;
  nFolds: number;
  runParams: Record<string, unknown>;
}

export function parseFoldTable(text: string): Int32Array {
  const lines = text.trim().split("\n");
  if (lines[0] !== "subject_id\tletter\trepetition\tfold") {
    throw new Error("unexpected fold-table header");
  }
  const folds = new Int32Array(lines.length - 1);
  for (let i = 1; i < lines.length; i++) {
    const cols = lines[i].split("\t");
    if (cols.length !== 4) {
      throw new Error(`bad fold-table row: ${lines[i]}`);
    }
    folds[i - 1] = Number(cols[3]);
  }
  return folds;
}

export function loadDataset(dir: string): Dataset {
  const feats = readTensorFile(join(dir, "features.myot"));
  const labelsRaw = readTensorFile(join(dir, "labels.myot"));
  const folds = parseFoldTable(readFileSync(join(dir, "folds.tsv"), "utf-8"));
  const runParams = JSON.parse(readFileSync(join(dir, "run.json"), "utf-8"));

  const n = feats.dims[0];
  if (labelsRaw.dims[0] !== n || folds.length !== n) {
    throw new Error("features, labels and fold table disagree on row count");
  }
  let features = tf.tensor(feats.values, feats.dims);
  if (feats.dims.length === 3) {
    features = features.transpose([0, 2, 1]);
  } else if (feats.dims.length === 4) {
    features = features.transpose([0, 2, 3, 1]);
  } else {
    throw new Error(`unsupported tensor rank ${feats.dims.length}`);
  }
  const labels = new Int32Array(n);
  for (let i = 0; i < n; i++) {
    const v = labelsRaw.values[i];
    if (!Number.isInteger(v) || v < 0 || v >= N_CLASSES) {
      throw new Error(`label out of range at row ${i}: ${v}`);
    }
    labels[i] = v;
  }
  let nFolds = 0;
  for (const f of folds) {
    nFolds = Math.max(nFolds, f + 1);
  }
  return { features, labels, folds, nFolds, runParams };
}

export function selectRows(ds: Dataset, keep: (fold: number) => boolean): {
  x: tf.Tensor;
  y: Int32Array;
} {
  const rows: number[] = [];
  for (let i = 0; i < ds.folds.length; i++) {
    if (keep(ds.folds[i])) {
      rows.push(i);
    }
  }
  const x = tf.gather(ds.features, rows);
  const y = new Int32Array(rows.length);
  rows.forEach((r, i) => { y[i] = ds.labels[r]; });
  return { x, y };
}

/** Deterministic PRNG (mulberry32) for stratified splits. */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function stratifiedSplit(labels: Int32Array, valFraction: number, seed: number): {
  trainIdx: number[];
  valIdx: number[];
} {
  const rand = mulberry32(seed);
  const byClass = new Map<number, number[]>();
  labels.forEach((label, i) => {
    if (!byClass.has(label)) {
      byClass.set(label, []);
    }
    byClass.get(label)!.push(i);
  });
  const trainIdx: number[] = [];
  const valIdx: number[] = [];
  for (const cls of [...byClass.keys()].sort((a, b) => a - b)) {
    const idx = byClass.get(cls)!;
    for (let i = idx.length - 1; i > 0; i--) {
      const j = Math.floor(rand() * (i + 1));
      [idx[i], idx[j]] = [idx[j], idx[i]];
    }
    const nVal = Math.floor(idx.length * valFraction + 0.5);
    valIdx.push(...idx.slice(0, nVal));
    trainIdx.push(...idx.slice(nVal));
  }
  if (valIdx.length === 0 && trainIdx.length > 0) {
    valIdx.push(trainIdx.pop()!);
  }
  trainIdx.sort((a, b) => a - b);
  valIdx.sort((a, b) => a - b);
  return { trainIdx, valIdx };
}
