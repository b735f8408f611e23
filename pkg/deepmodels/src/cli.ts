/**
 * Command-line entry point.
 *
 *   param-count --arch NAME [--frames N] [--channels N] [--bins N] [--attention]
 *   eval --tensors DIR --arch NAME --out DIR [--attention] [--filters N]
 *        [--epochs N] [--patience N] [--batch N] [--seed N]
 *   suite --metrics FILE [--metrics FILE ...]
 */

import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import * as tf from "@tensorflow/tfjs";

import { ARCH_NAMES, ArchName, ArchSpec, buildModel, modelName } from "./architectures.js";
import { loadDataset, selectRows } from "./data.js";
import { EvalResult, renderReport, renderSuite } from "./report.js";
import { evaluateModel, trainModel } from "./train.js";

interface Args {
  command: string;
  flags: Map<string, string[]>;
}

function parseArgs(argv: string[]): Args {
  if (argv.length === 0) {
    throw new Error("usage: <param-count|eval|suite> [flags]");
  }
  const flags = new Map<string, string[]>();
  for (let i = 1; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) {
      throw new Error(`unexpected argument ${arg}`);
    }
    const key = arg.slice(2);
    const isSwitch = i + 1 >= argv.length || argv[i + 1].startsWith("--");
    const value = isSwitch ? "true" : argv[++i];
    if (!flags.has(key)) {
      flags.set(key, []);
    }
    flags.get(key)!.push(value);
  }
  return { command: argv[0], flags };
}

function one(args: Args, key: string, fallback?: string): string {
  const values = args.flags.get(key);
  if (!values) {
    if (fallback !== undefined) {
      return fallback;
    }
    throw new Error(`missing required flag --${key}`);
  }
  return values[values.length - 1];
}

function archSpec(args: Args): ArchSpec {
  const name = one(args, "arch") as ArchName;
  if (!ARCH_NAMES.includes(name)) {
    throw new Error(`unknown architecture ${name}; expected one of ${ARCH_NAMES.join(", ")}`);
  }
  const spec: ArchSpec = { name, seed: Number(one(args, "seed", "0")) };
  if (args.flags.has("attention")) {
    spec.attention = true;
  }
  if (args.flags.has("filters")) {
    spec.filters = Number(one(args, "filters"));
  }
  return spec;
}

function imageInput(name: ArchName): boolean {
  return name === "twodcnn" || name === "parallel_shared_tf";
}

async function runParamCount(args: Args): Promise<void> {
  const spec = archSpec(args);
  const frames = Number(one(args, "frames", "63"));
  const channels = Number(one(args, "channels", "5"));
  const bins = Number(one(args, "bins", "101"));
  const shape = imageInput(spec.name) ? [bins, frames, channels] : [frames, channels];
  const model = buildModel(spec, shape);
  console.log(`${modelName(spec)} input=(${shape.join(", ")}) params=${model.countParams()}`);
}

async function runEval(args: Args): Promise<void> {
  const spec = archSpec(args);
  const tensorsDir = one(args, "tensors");
  const outDir = one(args, "out");
  const options = {
    batchSize: Number(one(args, "batch", "256")),
    maxEpochs: Number(one(args, "epochs", "500")),
    patience: Number(one(args, "patience", "10")),
    seed: Number(one(args, "seed", "0")),
    verbose: args.flags.has("verbose"),
  };

  const ds = loadDataset(tensorsDir);
  const inputShape = ds.features.shape.slice(1) as number[];
  if (imageInput(spec.name) !== (inputShape.length === 3)) {
    throw new Error(
      `${spec.name} expects ${imageInput(spec.name) ? "image" : "sequence"} tensors, `
      + `got rank-${inputShape.length + 1} features`);
  }
  const foldAccuracies: number[] = [];
  const confusion = Array.from({ length: 26 }, () => new Array<number>(26).fill(0));
  for (let fold = 0; fold < ds.nFolds; fold++) {
    const train = selectRows(ds, (f) => f !== fold);
    const test = selectRows(ds, (f) => f === fold);
    const model = buildModel(spec, inputShape);
    const history = await trainModel(model, train.x, train.y, options);
    const evaluation = evaluateModel(model, test.x, test.y);
    foldAccuracies.push(evaluation.accuracy);
    for (let i = 0; i < 26; i++) {
      for (let j = 0; j < 26; j++) {
        confusion[i][j] += evaluation.confusion[i][j];
      }
    }
    console.error(
      `fold ${fold}: accuracy=${evaluation.accuracy.toFixed(4)} `
      + `best_epoch=${history.bestEpoch} epochs=${history.epochsRun}`);
    train.x.dispose(); test.x.dispose();
    model.dispose();
  }
  const result: EvalResult = {
    scheme: String(ds.runParams.scheme ?? "?"),
    feature: String(ds.runParams.feature ?? "?"),
    model: modelName(spec),
    foldAccuracies,
    confusion,
    params: {
      ...ds.runParams,
      deep_train: {
        arch: modelName(spec),
        batch_size: options.batchSize,
        max_epochs: options.maxEpochs,
        patience: options.patience,
        seed: options.seed,
        filters: spec.filters ?? null,
      },
    },
  };
  mkdirSync(outDir, { recursive: true });
  const report = renderReport(result);
  writeFileSync(join(outDir, "report.txt"), report);
  writeFileSync(join(outDir, "metrics.json"), JSON.stringify(result, null, 1) + "\n");
  process.stdout.write(report);
}

async function runSuite(args: Args): Promise<void> {
  const paths = args.flags.get("metrics");
  if (!paths || paths.length === 0) {
    throw new Error("suite needs at least one --metrics file");
  }
  const results = paths.map((p) => JSON.parse(readFileSync(p, "utf-8")) as EvalResult);
  process.stdout.write(renderSuite(results));
}

async function main(): Promise<number> {
  try {
    const args = parseArgs(process.argv.slice(2));
    await tf.ready();
    if (args.command === "param-count") {
      await runParamCount(args);
    } else if (args.command === "eval") {
      await runEval(args);
    } else if (args.command === "suite") {
      await runSuite(args);
    } else {
      throw new Error(`unknown command ${args.command}`);
    }
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

main().then((code) => { process.exitCode = code; });
