/**
 * Additive attention pooling over sequence outputs: score_t = v' tanh(W h_t + b),
 * weights = softmax(scores), output = sum_t weights_t * h_t.
 */

import * as tf from "@tensorflow/tfjs";

export class AdditiveAttention extends tf.layers.Layer {
  static readonly className = "AdditiveAttention";

  private w: tf.LayerVariable | null = null;
  private b: tf.LayerVariable | null = null;
  private v: tf.LayerVariable | null = null;
  private readonly seed?: number;

  constructor(config?: { seed?: number; name?: string }) {
    super({ name: config?.name });
    this.seed = config?.seed;
  }

  override build(inputShape: tf.Shape | tf.Shape[]): void {
    const shape = inputShape as tf.Shape;
    const units = shape[shape.length - 1] as number;
    this.w = this.addWeight("w", [units, units], "float32",
      tf.initializers.glorotUniform({ seed: this.seed }));
    this.b = this.addWeight("b", [units], "float32", tf.initializers.zeros());
    this.v = this.addWeight("v", [units, 1], "float32",
      tf.initializers.glorotUniform({ seed: this.seed === undefined ? undefined : this.seed + 1 }));
    this.built = true;
  }

  /** Context vectors plus the per-step weights (weights sum to 1 per sample). */
  computeWithWeights(x: tf.Tensor3D): { context: tf.Tensor2D; weights: tf.Tensor2D } {
    return tf.tidy(() => {
      const hidden = tf.tanh(tf.add(tf.matMul(x, this.w!.read() as tf.Tensor2D), this.b!.read()));
      const scores = tf.squeeze<tf.Tensor2D>(
        tf.matMul(hidden, this.v!.read() as tf.Tensor2D), [2]);
      const weights = tf.softmax(scores, 1);
      const context = tf.sum(tf.mul(x, tf.expandDims(weights, 2)), 1) as tf.Tensor2D;
      return { context: tf.keep(context), weights: tf.keep(weights) };
    });
  }

  override call(inputs: tf.Tensor | tf.Tensor[]): tf.Tensor {
    const x = (Array.isArray(inputs) ? inputs[0] : inputs) as tf.Tensor3D;
    const { context, weights } = this.computeWithWeights(x);
    weights.dispose();
    return context;
  }

  override computeOutputShape(inputShape: tf.Shape | tf.Shape[]): tf.Shape {
    const shape = inputShape as tf.Shape;
    return [shape[0], shape[shape.length - 1]];
  }

  override getConfig(): tf.serialization.ConfigDict {
    return { ...super.getConfig(), seed: this.seed ?? null };
  }
}

tf.serialization.registerClass(AdditiveAttention);
