/**
 * Training protocol shared with the baseline classifier: Adam, categorical
 * cross-entropy, mini-batches of 256, stratified 80:20 train/validation
 * split, early stopping on validation accuracy with a patience of 10 and
 * best-epoch weight restore.  Dropout is active in training only.
 */

import * as tf from "@tensorflow/tfjs";

import { N_CLASSES, stratifiedSplit } from "./data.js";
import { installFastConvGradients } from "./fastconv.js";

export interface TrainOptions {
  batchSize?: number;
  maxEpochs?: number;
  patience?: number;
  valFraction?: number;
  learningRate?: number;
  seed?: number;
  verbose?: boolean;
}

export interface TrainHistory {
  loss: number[];
  valAccuracy: number[];
  bestEpoch: number;
  bestValAccuracy: number;
  epochsRun: number;
}

export async function trainModel(
  model: tf.LayersModel,
  features: tf.Tensor,
  labels: Int32Array,
  options: TrainOptions = {},
): Promise<TrainHistory> {
  installFastConvGradients();
  const batchSize = options.batchSize ?? 256;
  const maxEpochs = options.maxEpochs ?? 500;
  const patience = options.patience ?? 10;
  const valFraction = options.valFraction ?? 0.2;
  const learningRate = options.learningRate ?? 1e-3;
  const seed = options.seed ?? 0;

  const { trainIdx, valIdx } = stratifiedSplit(labels, valFraction, seed);
  const xTrain = tf.gather(features, trainIdx);
  const xVal = tf.gather(features, valIdx);
  const yTrain = tf.oneHot(trainIdx.map((i) => labels[i]), N_CLASSES);
  const yVal = tf.oneHot(valIdx.map((i) => labels[i]), N_CLASSES);

  model.compile({
    optimizer: tf.train.adam(learningRate, 0.9, 0.999, 1e-8),
    loss: "categoricalCrossentropy",
    metrics: ["accuracy"],
  });

  const history: TrainHistory = {
    loss: [],
    valAccuracy: [],
    bestEpoch: -1,
    bestValAccuracy: -1,
    epochsRun: 0,
  };
  const best: { weights: tf.Tensor[] | null } = { weights: null };
  let badEpochs = 0;

  await model.fit(xTrain, yTrain, {
    batchSize,
    epochs: maxEpochs,
    validationData: [xVal, yVal],
    shuffle: true,
    verbose: 0,
    callbacks: {
      onEpochEnd: async (epoch, logs) => {
        const loss = logs?.loss as number;
        const valAcc = (logs?.val_acc ?? logs?.val_accuracy) as number;
        if (!Number.isFinite(loss)) {
          model.stopTraining = true;
          throw new Error(`loss became non-finite at epoch ${epoch}`);
        }
        history.loss.push(loss);
        history.valAccuracy.push(valAcc);
        history.epochsRun = epoch + 1;
        if (options.verbose) {
          console.error(`epoch ${epoch}: loss=${loss.toFixed(4)} val_acc=${valAcc.toFixed(4)}`);
        }
        if (valAcc > history.bestValAccuracy) {
          history.bestValAccuracy = valAcc;
          history.bestEpoch = epoch;
          badEpochs = 0;
          if (best.weights) {
            best.weights.forEach((w) => w.dispose());
          }
          best.weights = model.getWeights().map((w) => w.clone());
        } else {
          badEpochs += 1;
          if (badEpochs >= patience) {
            model.stopTraining = true;
          }
        }
        await tf.nextFrame();
      },
    },
  });

  if (best.weights) {
    model.setWeights(best.weights);
    best.weights.forEach((w) => w.dispose());
  }
  xTrain.dispose(); xVal.dispose(); yTrain.dispose(); yVal.dispose();
  return history;
}

export interface Evaluation {
  accuracy: number;
  confusion: number[][];
  predictions: Int32Array;
}

export function evaluateModel(model: tf.LayersModel, features: tf.Tensor,
  labels: Int32Array): Evaluation {
  const predictions = tf.tidy(() => {
    const probs = model.predict(features, { batchSize: 256 }) as tf.Tensor2D;
    return probs.argMax(1);
  });
  const predicted = predictions.dataSync() as Int32Array;
  predictions.dispose();
  const confusion: number[][] = Array.from({ length: N_CLASSES },
    () => new Array<number>(N_CLASSES).fill(0));
  let correct = 0;
  for (let i = 0; i < labels.length; i++) {
    confusion[labels[i]][predicted[i]] += 1;
    if (labels[i] === predicted[i]) {
      correct += 1;
    }
  }
  return {
    accuracy: correct / labels.length,
    confusion,
    predictions: Int32Array.from(predicted),
  };
}
