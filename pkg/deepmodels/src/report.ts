/**
 * The shared evaluation-report schema, line-compatible with the reports the
 * extraction CLI writes so both components' outputs are diffable.
 */

import { LETTERS, N_CLASSES } from "./data.js";

export interface EvalResult {
  scheme: string;
  feature: string;
  model: string;
  foldAccuracies: number[];
  confusion: number[][];
  params: Record<string, unknown>;
}

export function populationStd(values: number[]): number {
  const mean = values.reduce((a, b) => a + b, 0) / values.length;
  const varSum = values.reduce((a, b) => a + (b - mean) * (b - mean), 0);
  return Math.sqrt(varSum / values.length);
}

export function formatMeanStd(mean: number, std: number): string {
  return `${mean.toFixed(2)} ± ${std.toFixed(3)}`;
}

export function topConfusablePairs(confusion: number[][], k = 5): Array<[string, number]> {
  let offTotal = 0;
  for (let i = 0; i < N_CLASSES; i++) {
    for (let j = 0; j < N_CLASSES; j++) {
      if (i !== j) {
        offTotal += confusion[i][j];
      }
    }
  }
  if (offTotal === 0) {
    return [];
  }
  const pairs: Array<[string, number]> = [];
  for (let i = 0; i < N_CLASSES; i++) {
    for (let j = i + 1; j < N_CLASSES; j++) {
      const mass = confusion[i][j] + confusion[j][i];
      if (mass > 0) {
        pairs.push([`${LETTERS[i]},${LETTERS[j]}`, (100 * mass) / offTotal]);
      }
    }
  }
  pairs.sort((a, b) => (b[1] - a[1]) || (a[0] < b[0] ? -1 : 1));
  return pairs.slice(0, k);
}

function sortedStringify(value: unknown): string {
  if (Array.isArray(value)) {
    return `[${value.map(sortedStringify).join(", ")}]`;
  }
  if (value !== null && typeof value === "object") {
    const entries = Object.entries(value as Record<string, unknown>)
      .sort(([a], [b]) => (a < b ? -1 : 1))
      .map(([k, v]) => `${JSON.stringify(k)}: ${sortedStringify(v)}`);
    return `{${entries.join(", ")}}`;
  }
  return JSON.stringify(value);
}

export function renderReport(result: EvalResult): string {
  const accs = result.foldAccuracies;
  const mean = accs.reduce((a, b) => a + b, 0) / accs.length;
  const std = populationStd(accs);
  const pairs = topConfusablePairs(result.confusion, 5);
  const lines = [
    "airwriting-report v1",
    `scheme: ${result.scheme}`,
    `feature: ${result.feature}`,
    `model: ${result.model}`,
    `folds: ${accs.length}`,
    `fold_accuracies: ${accs.map((a) => a.toFixed(6)).join(" ")}`,
    `accuracy_mean: ${mean.toFixed(6)}`,
    `accuracy_std: ${std.toFixed(6)}`,
    `accuracy_summary: ${formatMeanStd(mean, std)}`,
    "confusion_rows: 26",
  ];
  for (const row of result.confusion) {
    lines.push(row.join(" "));
  }
  lines.push(`top_pairs: ${pairs.length}`);
  for (const [pair, pct] of pairs) {
    lines.push(`${pair} ${pct.toFixed(2)}%`);
  }
  lines.push(`params: ${sortedStringify(result.params)}`);
  return lines.join("\n") + "\n";
}

/** Accuracy grid over several runs, one row per model, one column per feature. */
export function renderSuite(results: EvalResult[]): string {
  const features = [...new Set(results.map((r) => r.feature))].sort();
  const models = [...new Set(results.map((r) => r.model))].sort();
  const lines = ["airwriting-suite v1", `columns: ${["model", ...features].join(" ")}`];
  for (const model of models) {
    const cells = [model];
    for (const feature of features) {
      const match = results.find((r) => r.model === model && r.feature === feature);
      if (match) {
        const mean = match.foldAccuracies.reduce((a, b) => a + b, 0) / match.foldAccuracies.length;
        cells.push(formatMeanStd(mean, populationStd(match.foldAccuracies)));
      } else {
        cells.push("-");
      }
    }
    lines.push(cells.join(" | "));
  }
  return lines.join("\n") + "\n";
}
