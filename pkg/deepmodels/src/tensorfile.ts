/**
 * Bit-exact MYOT tensor files (little-endian float32), matching the format
 * the extraction CLI writes: magic "MYOT", version u16, dtype u8 (0 = f32),
 * ndim u8, ndim x u64 dims, then row-major payload.
 */

import { readFileSync, writeFileSync } from "node:fs";

const MAGIC = "MYOT";
const VERSION = 1;
const DTYPE_F32 = 0;

export interface TensorData {
  dims: number[];
  values: Float32Array;
}

export function parseTensor(buf: Buffer): TensorData {
  if (buf.length < 8) {
    throw new Error("tensor file too short for a header");
  }
  if (buf.toString("latin1", 0, 4) !== MAGIC) {
    throw new Error(`bad magic ${buf.toString("latin1", 0, 4)}`);
  }
  const view = new DataView(buf.buffer, buf.byteOffset, buf.byteLength);
  const version = view.getUint16(4, true);
  if (version !== VERSION) {
    throw new Error(`unsupported tensor version ${version}`);
  }
  if (view.getUint8(6) !== DTYPE_F32) {
    throw new Error(`unknown dtype code ${view.getUint8(6)}`);
  }
  const ndim = view.getUint8(7);
  if (ndim < 1) {
    throw new Error("ndim must be >= 1");
  }
  let offset = 8;
  const dims: number[] = [];
  let count = 1;
  for (let i = 0; i < ndim; i++) {
    const dim = Number(view.getBigUint64(offset, true));
    if (dim === 0) {
      throw new Error("zero-sized dimension");
    }
    dims.push(dim);
    count *= dim;
    offset += 8;
  }
  if (buf.length < offset + 4 * count) {
    throw new Error(`truncated payload: wanted ${4 * count} bytes`);
  }
  const values = new Float32Array(count);
  for (let i = 0; i < count; i++) {
    values[i] = view.getFloat32(offset + 4 * i, true);
  }
  return { dims, values };
}

export function serializeTensor(tensor: TensorData): Buffer {
  const count = tensor.dims.reduce((a, b) => a * b, 1);
  if (count !== tensor.values.length) {
    throw new Error("dims do not match value count");
  }
  const buf = Buffer.alloc(8 + 8 * tensor.dims.length + 4 * count);
  buf.write(MAGIC, 0, "latin1");
  const view = new DataView(buf.buffer, buf.byteOffset, buf.byteLength);
  view.setUint16(4, VERSION, true);
  view.setUint8(6, DTYPE_F32);
  view.setUint8(7, tensor.dims.length);
  let offset = 8;
  for (const dim of tensor.dims) {
    view.setBigUint64(offset, BigInt(dim), true);
    offset += 8;
  }
  for (let i = 0; i < count; i++) {
    view.setFloat32(offset + 4 * i, tensor.values[i], true);
  }
  return buf;
}

export function readTensorFile(path: string): TensorData {
  return parseTensor(readFileSync(path));
}

export function writeTensorFile(path: string, tensor: TensorData): void {
  writeFileSync(path, serializeTensor(tensor));
}
