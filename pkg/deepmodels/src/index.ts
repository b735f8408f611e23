export { AdditiveAttention } from "./attention.js";
export { ARCH_NAMES, buildModel, modelName } from "./architectures.js";
export type { ArchName, ArchSpec } from "./architectures.js";
export { LETTERS, N_CLASSES, loadDataset, mulberry32, parseFoldTable, selectRows, stratifiedSplit } from "./data.js";
export type { Dataset } from "./data.js";
export { formatMeanStd, populationStd, renderReport, renderSuite, topConfusablePairs } from "./report.js";
export type { EvalResult } from "./report.js";
export { parseTensor, readTensorFile, serializeTensor, writeTensorFile } from "./tensorfile.js";
export type { TensorData } from "./tensorfile.js";
export { installFastConvGradients } from "./fastconv.js";
export { evaluateModel, trainModel } from "./train.js";
export type { Evaluation, TrainHistory, TrainOptions } from "./train.js";
