import { execFileSync } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { parseFoldTable } from "../src/data.js";
import { parseTensor, serializeTensor, writeTensorFile } from "../src/tensorfile.js";

describe("tensor files", () => {
  it("round-trips bit-exactly", () => {
    const values = new Float32Array([1.5, -2.25, 3.125, 0.0, 1e-20, 4e6]);
    const buf = serializeTensor({ dims: [2, 3], values });
    const back = parseTensor(buf);
    expect(back.dims).toEqual([2, 3]);
    expect(new Uint32Array(back.values.buffer)).toEqual(new Uint32Array(values.buffer));
  });

  it("writes the 20-byte single-value layout", () => {
    const buf = serializeTensor({ dims: [1], values: new Float32Array([3.5]) });
    expect(buf.length).toBe(20);
    expect(buf.toString("latin1", 0, 4)).toBe("MYOT");
  });

  it("rejects bad magic and truncation", () => {
    const buf = serializeTensor({ dims: [4], values: new Float32Array(4) });
    const bad = Buffer.from(buf);
    bad.write("XXXX", 0, "latin1");
    expect(() => parseTensor(bad)).toThrow(/magic/);
    expect(() => parseTensor(buf.subarray(0, buf.length - 2))).toThrow(/truncated/);
  });

  it("is readable by the extraction pipeline's loader", () => {
    const dir = mkdtempSync(join(tmpdir(), "myot-"));
    const values = new Float32Array([0.5, -1.5, 2.5, -3.5, 4.5, -5.5]);
    writeTensorFile(join(dir, "x.myot"), { dims: [3, 2], values });
    const script = [
      "import sys, numpy as np",
      "from airwriting.tensorfile import read_tensor",
      "t = read_tensor(sys.argv[1])",
      "print(t.shape)",
      "print(' '.join(repr(float(v)) for v in t.ravel()))",
    ].join("\n");
    const out = execFileSync("python3", ["-c", script, join(dir, "x.myot")],
      { encoding: "utf-8" });
    const [shapeLine, valuesLine] = out.trim().split("\n");
    expect(shapeLine).toBe("(3, 2)");
    expect(valuesLine.split(" ").map(Number)).toEqual([...values]);
  });

  it("parses fold tables in tensor row order", () => {
    const text = "subject_id\tletter\trepetition\tfold\nS01\tA\t0\t0\nS01\tA\t1\t1\nS01\tB\t0\t0\n";
    expect([...parseFoldTable(text)]).toEqual([0, 1, 0]);
    expect(() => parseFoldTable("bogus\nrows")).toThrow(/header/);
  });
});
