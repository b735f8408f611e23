/**
 * Faster conv2d filter gradient for the pure-JS backend.
 *
 * The stock cpu kernel for Conv2DBackpropFilter is a naive six-deep loop,
 * roughly 50x slower than the forward convolution at our sizes.  For the
 * stride-1, dilation-1, channels-last case (every convolution in this
 * model family; pooling layers do the downsampling) the filter gradient is
 * itself a valid convolution:
 *
 *     dW[u, v, ci, co] = sum_{b,p,q} x_pad[b, p+u, q+v, ci] * dy[b, p, q, co]
 *
 * i.e. conv2d over the padded input with the batch axis as channels and dy
 * as the filter.  That runs through the backend's im2col matmul path.
 * Everything else falls back to the stock kernels.
 */

import * as tf from "@tensorflow/tfjs";

let installed = false;

type Attrs = Record<string, unknown>;

function stockFilterGrad(x: tf.Tensor4D, dy: tf.Tensor4D, filterShape: number[],
  attrs: Attrs): tf.Tensor4D {
  return tf.engine().runKernel("Conv2DBackpropFilter", { x, dy },
    { ...attrs, filterShape }) as tf.Tensor4D;
}

function filterGrad(x: tf.Tensor4D, dy: tf.Tensor4D, filterShape: number[],
  attrs: Attrs): tf.Tensor4D {
  const strides = attrs.strides as number | [number, number];
  const pad = attrs.pad as "same" | "valid" | number;
  const dataFormat = attrs.dataFormat as string;
  const dimRoundingMode = attrs.dimRoundingMode as "floor" | "round" | "ceil" | undefined;
  const dilations = (attrs.dilations as number | [number, number] | undefined) ?? 1;
  if (dataFormat !== "NHWC") {
    return stockFilterGrad(x, dy, filterShape, attrs);
  }
  const info = tf.backend_util.computeConv2DInfo(
    x.shape, filterShape as [number, number, number, number], strides, dilations,
    pad, dimRoundingMode, false, "channelsLast");
  const stride1 = info.strideHeight === 1 && info.strideWidth === 1
    && info.dilationHeight === 1 && info.dilationWidth === 1
    && info.padInfo.type !== "EXPLICIT";
  if (!stride1) {
    return stockFilterGrad(x, dy, filterShape, attrs);
  }
  const { top, bottom, left, right } = info.padInfo;
  return tf.tidy(() => {
    const padded = tf.pad(x, [[0, 0], [top, bottom], [left, right], [0, 0]]);
    const asBatchChannels = tf.transpose(padded, [3, 1, 2, 0]); // [ci, Hp, Wp, b]
    const dyAsFilter = tf.transpose(dy, [1, 2, 0, 3]); // [Ho, Wo, b, co]
    const grad = tf.conv2d(asBatchChannels as tf.Tensor4D, dyAsFilter as tf.Tensor4D,
      1, "valid"); // [ci, kh, kw, co]
    return tf.transpose(grad, [1, 2, 0, 3]) as tf.Tensor4D;
  });
}

/** Replace the Conv2D gradient so filter gradients avoid the slow kernel. */
export function installFastConvGradients(): void {
  if (installed) {
    return;
  }
  installed = true;
  tf.unregisterGradient("Conv2D");
  tf.registerGradient({
    kernelName: "Conv2D",
    inputsToSave: ["x", "filter"],
    gradFunc: (dy: tf.Tensor | tf.Tensor[], saved: tf.Tensor[], attrs: unknown) => {
      const [x, filter] = saved as [tf.Tensor4D, tf.Tensor4D];
      const dy4 = (Array.isArray(dy) ? dy[0] : dy) as tf.Tensor4D;
      const a = attrs as Attrs;
      return {
        x: () => tf.engine().runKernel("Conv2DBackpropInput", { dy: dy4, filter },
          { ...a, inputShape: x.shape }) as tf.Tensor4D,
        filter: () => filterGrad(x, dy4, filter.shape, a),
      };
    },
  });
}
