import * as tf from "@tensorflow/tfjs";
import { beforeAll, describe, expect, it } from "vitest";

import { installFastConvGradients } from "../src/fastconv.js";

beforeAll(async () => {
  await tf.ready();
  installFastConvGradients();
});

function stockFilterGrad(x: tf.Tensor4D, dy: tf.Tensor4D, filterShape: number[],
  strides: [number, number], pad: "same" | "valid"): tf.Tensor4D {
  return tf.engine().runKernel("Conv2DBackpropFilter", { x, dy },
    { strides, pad, dataFormat: "NHWC", dimRoundingMode: undefined, filterShape },
  ) as tf.Tensor4D;
}

function maxRelDiff(a: tf.Tensor, b: tf.Tensor): number {
  const diff = tf.max(tf.abs(tf.sub(a, b))).dataSync()[0];
  const scale = tf.max(tf.abs(b)).dataSync()[0];
  return diff / Math.max(scale, 1e-30);
}

describe("patched conv filter gradient", () => {
  const cases: Array<{ k: [number, number]; pad: "same" | "valid"; strides: [number, number] }> = [
    { k: [1, 10], pad: "same", strides: [1, 1] }, // the conv1d-as-conv2d case
    { k: [3, 3], pad: "same", strides: [1, 1] },
    { k: [4, 2], pad: "same", strides: [1, 1] }, // even kernels split padding asymmetrically
    { k: [3, 3], pad: "valid", strides: [1, 1] },
    { k: [3, 3], pad: "same", strides: [2, 2] }, // falls back to the stock kernel
  ];

  for (const { k, pad, strides } of cases) {
    it(`matches the stock kernel for k=${k} pad=${pad} strides=${strides}`, () => {
      const x = tf.randomNormal([3, 8, 11, 4], 0, 1, "float32", 1) as tf.Tensor4D;
      const filter = tf.randomNormal([k[0], k[1], 4, 6], 0, 1, "float32", 2) as tf.Tensor4D;
      const upstream = tf.randomNormal(
        tf.conv2d(x, filter, strides, pad).shape, 0, 1, "float32", 3) as tf.Tensor4D;
      const grads = tf.grads(
        (xx: tf.Tensor4D, ff: tf.Tensor4D) => tf.conv2d(xx, ff, strides, pad))(
        [x, filter], upstream);
      const want = stockFilterGrad(x, upstream, filter.shape, strides, pad);
      expect(maxRelDiff(grads[1], want)).toBeLessThan(1e-4);
      // input gradient still flows through the stock kernel
      expect(grads[0].shape).toEqual(x.shape);
    });
  }

  it("trains a small conv net end to end", async () => {
    const model = tf.sequential();
    model.add(tf.layers.conv1d({
      filters: 8, kernelSize: 4, padding: "same", activation: "relu",
      inputShape: [12, 3],
    }));
    model.add(tf.layers.globalAveragePooling1d({}));
    model.add(tf.layers.dense({ units: 2, activation: "softmax" }));
    model.compile({ optimizer: tf.train.adam(0.05), loss: "categoricalCrossentropy" });
    const x = tf.randomNormal([32, 12, 3], 0, 1, "float32", 4);
    const labels = tf.tensor2d(
      Array.from({ length: 32 }, (_, i) => (i % 2 === 0 ? [1, 0] : [0, 1])));
    const first = await model.trainOnBatch(x, labels) as number;
    for (let i = 0; i < 20; i++) {
      await model.trainOnBatch(x, labels);
    }
    const last = await model.trainOnBatch(x, labels) as number;
    expect(last).toBeLessThan(first); // gradient direction is descent
    model.dispose();
  });
});
