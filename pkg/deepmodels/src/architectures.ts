/**
 * Model builders for the airwriting classifier family.
 *
 * Envelope models consume (frames, channels) sequences; the 2-D CNN and the
 * parallel shared-weight variant consume (bins, frames, channels) images.
 * Hybrid conv layers default to 100 filters per the architecture tables; a
 * `filters` override restores the 200-filter prose variant.
 */

import * as tf from "@tensorflow/tfjs";

import { AdditiveAttention } from "./attention.js";
import { N_CLASSES } from "./data.js";

export const ARCH_NAMES = [
  "onedcnn",
  "lstm",
  "bilstm",
  "onedcnn_lstm",
  "onedcnn_bilstm",
  "onedcnn_pool_lstm",
  "onedcnn_pool_bilstm",
  "twodcnn",
  "parallel_shared_tf",
] as const;

export type ArchName = (typeof ARCH_NAMES)[number];

export interface ArchSpec {
  name: ArchName;
  attention?: boolean;
  /** Filter count of the hybrid models' conv layers (tables: 100, prose: 200). */
  filters?: number;
  seed?: number;
}

const LSTM_UNITS = 512;
const DROPOUT = 0.5;
const KERNEL = 10;

function glorot(seed: number | undefined, offset: number) {
  return tf.initializers.glorotUniform({ seed: seed === undefined ? undefined : seed + offset });
}

export function modelName(spec: ArchSpec): string {
  return spec.attention ? `${spec.name}_att` : spec.name;
}

function isRecurrent(name: ArchName): boolean {
  return name.includes("lstm");
}

/** Transpose-and-slice helper for the parallel towers: image -> one channel's sequence. */
class ChannelSequence extends tf.layers.Layer {
  static readonly className = "ChannelSequence";

  constructor(private readonly channel: number, name?: string) {
    super({ name });
  }

  override call(inputs: tf.Tensor | tf.Tensor[]): tf.Tensor {
    const x = (Array.isArray(inputs) ? inputs[0] : inputs) as tf.Tensor4D;
    return tf.tidy(() => {
      const sliced = tf.squeeze<tf.Tensor3D>(
        tf.slice(x, [0, 0, 0, this.channel], [-1, -1, -1, 1]), [3]);
      return sliced.transpose([0, 2, 1]); // (batch, frames, bins)
    });
  }

  override computeOutputShape(inputShape: tf.Shape | tf.Shape[]): tf.Shape {
    const s = inputShape as tf.Shape;
    return [s[0], s[2], s[1]];
  }

  override getConfig(): tf.serialization.ConfigDict {
    return { ...super.getConfig(), channel: this.channel };
  }
}

tf.serialization.registerClass(ChannelSequence);

function convBlock(filters: number, seed: number | undefined, offset: number, name: string) {
  return tf.layers.conv1d({
    filters,
    kernelSize: KERNEL,
    strides: 1,
    padding: "same",
    activation: "relu",
    kernelInitializer: glorot(seed, offset),
    name,
  });
}

// glorot for the recurrent kernels too: tfjs' orthogonal initializer runs a
// pure-JS QR decomposition that takes minutes at 512 units
function lstmLayer(seed: number | undefined, offset: number, returnSequences: boolean, name: string) {
  return tf.layers.lstm({
    units: LSTM_UNITS,
    activation: "tanh",
    returnSequences,
    kernelInitializer: glorot(seed, offset),
    recurrentInitializer: glorot(seed, offset + 50),
    name,
  });
}

function bilstmLayer(seed: number | undefined, offset: number, returnSequences: boolean, name: string) {
  return tf.layers.bidirectional({
    layer: tf.layers.lstm({
      units: LSTM_UNITS,
      activation: "tanh",
      returnSequences,
      kernelInitializer: glorot(seed, offset),
      recurrentInitializer: glorot(seed, offset + 50),
    }) as tf.RNN,
    mergeMode: "concat",
    name,
  });
}

function head(x: tf.SymbolicTensor, seed: number | undefined): tf.SymbolicTensor {
  const dropped = tf.layers.dropout({ rate: DROPOUT }).apply(x) as tf.SymbolicTensor;
  return tf.layers.dense({
    units: N_CLASSES,
    activation: "softmax",
    kernelInitializer: glorot(seed, 99),
  }).apply(dropped) as tf.SymbolicTensor;
}

function onedcnnTrunk(x: tf.SymbolicTensor, seed: number | undefined,
  prefix = "trunk"): tf.SymbolicTensor {
  let out = convBlock(100, seed, 1, `${prefix}_conv1`).apply(x) as tf.SymbolicTensor;
  out = convBlock(100, seed, 2, `${prefix}_conv2`).apply(out) as tf.SymbolicTensor;
  out = tf.layers.maxPooling1d({ poolSize: 3, strides: 3, padding: "valid" })
    .apply(out) as tf.SymbolicTensor;
  out = convBlock(160, seed, 3, `${prefix}_conv3`).apply(out) as tf.SymbolicTensor;
  out = convBlock(160, seed, 4, `${prefix}_conv4`).apply(out) as tf.SymbolicTensor;
  return tf.layers.globalAveragePooling1d({}).apply(out) as tf.SymbolicTensor;
}

function recurrentStack(x: tf.SymbolicTensor, spec: ArchSpec, bidirectional: boolean,
  withConv: boolean, withPool: boolean): tf.SymbolicTensor {
  const seed = spec.seed;
  let out = x;
  if (withConv) {
    const filters = spec.filters ?? 100;
    out = convBlock(filters, seed, 11, "hybrid_conv1").apply(out) as tf.SymbolicTensor;
    out = convBlock(filters, seed, 12, "hybrid_conv2").apply(out) as tf.SymbolicTensor;
    if (withPool) {
      out = tf.layers.maxPooling1d({ poolSize: 3, strides: 3, padding: "valid" })
        .apply(out) as tf.SymbolicTensor;
    }
  }
  const attention = spec.attention === true;
  const make = bidirectional ? bilstmLayer : lstmLayer;
  out = make(seed, 21, true, "rnn1").apply(out) as tf.SymbolicTensor;
  out = make(seed, 22, attention, "rnn2").apply(out) as tf.SymbolicTensor;
  if (attention) {
    out = new AdditiveAttention({ seed, name: "attention" }).apply(out) as tf.SymbolicTensor;
  }
  return out;
}

function twodcnnTrunk(x: tf.SymbolicTensor, seed: number | undefined): tf.SymbolicTensor {
  let out = x;
  [32, 64, 128, 256].forEach((filters, i) => {
    out = tf.layers.conv2d({
      filters,
      kernelSize: [3, 3],
      strides: [1, 1],
      padding: "same",
      activation: "relu",
      kernelInitializer: glorot(seed, 31 + i),
      name: `conv2d_${i + 1}`,
    }).apply(out) as tf.SymbolicTensor;
    out = tf.layers.maxPooling2d({ poolSize: [2, 2], strides: [2, 2], padding: "same" })
      .apply(out) as tf.SymbolicTensor;
  });
  return tf.layers.flatten().apply(out) as tf.SymbolicTensor;
}

function parallelSharedTrunk(x: tf.SymbolicTensor, inputShape: number[],
  seed: number | undefined): tf.SymbolicTensor {
  const channels = inputShape[2];
  // one tower's layers, applied to every channel: weights are shared
  const conv1 = convBlock(100, seed, 41, "tower_conv1");
  const conv2 = convBlock(100, seed, 42, "tower_conv2");
  const pool = tf.layers.maxPooling1d({ poolSize: 3, strides: 3, padding: "valid" });
  const conv3 = convBlock(160, seed, 43, "tower_conv3");
  const conv4 = convBlock(160, seed, 44, "tower_conv4");
  const gap = tf.layers.globalAveragePooling1d({});
  const towers: tf.SymbolicTensor[] = [];
  for (let c = 0; c < channels; c++) {
    let t = new ChannelSequence(c, `channel_${c}`).apply(x) as tf.SymbolicTensor;
    t = conv1.apply(t) as tf.SymbolicTensor;
    t = conv2.apply(t) as tf.SymbolicTensor;
    t = pool.apply(t) as tf.SymbolicTensor;
    t = conv3.apply(t) as tf.SymbolicTensor;
    t = conv4.apply(t) as tf.SymbolicTensor;
    towers.push(gap.apply(t) as tf.SymbolicTensor);
  }
  return tf.layers.concatenate().apply(towers) as tf.SymbolicTensor;
}

export function buildModel(spec: ArchSpec, inputShape: number[]): tf.LayersModel {
  if (spec.attention && !isRecurrent(spec.name)) {
    throw new Error(`attention is only defined for the LSTM-family models, not ${spec.name}`);
  }
  const seed = spec.seed;
  const input = tf.input({ shape: inputShape });
  let features: tf.SymbolicTensor;
  switch (spec.name) {
    case "onedcnn":
      features = onedcnnTrunk(input, seed);
      break;
    case "lstm":
      features = recurrentStack(input, spec, false, false, false);
      break;
    case "bilstm":
      features = recurrentStack(input, spec, true, false, false);
      break;
    case "onedcnn_lstm":
      features = recurrentStack(input, spec, false, true, false);
      break;
    case "onedcnn_bilstm":
      features = recurrentStack(input, spec, true, true, false);
      break;
    case "onedcnn_pool_lstm":
      features = recurrentStack(input, spec, false, true, true);
      break;
    case "onedcnn_pool_bilstm":
      features = recurrentStack(input, spec, true, true, true);
      break;
    case "twodcnn":
      if (inputShape.length !== 3) {
        throw new Error("twodcnn expects a (bins, frames, channels) input");
      }
      features = twodcnnTrunk(input, seed);
      break;
    case "parallel_shared_tf":
      if (inputShape.length !== 3) {
        throw new Error("parallel_shared_tf expects a (bins, frames, channels) input");
      }
      features = parallelSharedTrunk(input, inputShape, seed);
      break;
    default:
      throw new Error(`unknown architecture ${spec.name as string}`);
  }
  return tf.model({ inputs: input, outputs: head(features, seed), name: modelName(spec) });
}
