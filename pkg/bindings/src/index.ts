/**
 * Thin bindings over the scenetok CLI, preserving bit-exact token IDs.
 *
 * Everything goes through the CLI's public surfaces (scene JSONL, ID lines,
 * the STK1 binary stream, the vocabulary manifest, JSON eval reports); no
 * token logic is reimplemented here. The API is batch-oriented: lists in,
 * lists out.
 */

import { spawnSync } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export const VERSION = "0.1.0";

export interface SceneDoc {
  dataset_style: string;
  objects: Record<string, unknown>[];
}

export interface EvalReport {
  per_tau: Record<string, number>;
  mean_jaccard: number;
  per_scene: Record<string, number[][]>;
}

export interface VocabManifest {
  baseSize: number;
  imageCodes: number;
  shapeCodes: number;
  totalSize: number;
  rows: Array<[number, string]>;
}

export interface CoreOptions {
  /** Bin width as a decimal string; defaults to "0.05". */
  granularity?: string;
  /** Numeric range "LO,HI"; defaults to "-8,8". */
  range?: string;
  imageCodes?: number;
  withShapes?: boolean;
  /** Python interpreter running the core (default: $SCENETOK_PYTHON or python3). */
  python?: string;
}

export interface ParseOptions extends CoreOptions {
  mode?: "strict" | "lenient";
  style?: string;
}

/** Native CLI failure, surfaced with its exit code and stderr. */
export class CoreError extends Error {
  constructor(public readonly exitCode: number, public readonly stderr: string) {
    super(`scenetok exited with code ${exitCode}: ${stderr.trim()}`);
    this.name = "CoreError";
  }
}

function runCli(args: string[], opts?: CoreOptions, stdin?: string): string {
  const python = opts?.python ?? process.env.SCENETOK_PYTHON ?? "python3";
  const result = spawnSync(python, ["-m", "scenetok.cli", ...args], {
    input: stdin,
    encoding: "utf8",
    maxBuffer: 1 << 28,
  });
  if (result.error) {
    throw result.error;
  }
  if (result.status !== 0) {
    throw new CoreError(result.status ?? -1, result.stderr ?? "");
  }
  return result.stdout;
}

function coreFlags(opts?: CoreOptions): string[] {
  // equals-form so values like "-8,8" are not mistaken for flags
  const flags = [
    `--granularity=${opts?.granularity ?? "0.05"}`,
    `--range=${opts?.range ?? "-8,8"}`,
  ];
  if (opts?.imageCodes !== undefined) {
    flags.push(`--image-codes=${opts.imageCodes}`);
  }
  if (opts?.withShapes) {
    flags.push("--with-shapes");
  }
  return flags;
}

function lines(text: string): string[] {
  return text.split("\n").filter((line) => line.trim().length > 0);
}

/** Serialize scene documents to vocabulary-ID sequences. */
export function bindSerialize(scenes: SceneDoc[], opts?: CoreOptions): number[][] {
  if (scenes.length === 0) {
    return [];
  }
  const stdin = scenes.map((s) => JSON.stringify(s)).join("\n") + "\n";
  const out = runCli(["serialize", "--ids", ...coreFlags(opts)], opts, stdin);
  return lines(out).map((line) => line.split(" ").map(Number));
}

/** Parse vocabulary-ID sequences back into scene documents. */
export function bindParse(idSequences: number[][], opts?: ParseOptions): SceneDoc[] {
  if (idSequences.length === 0) {
    return [];
  }
  const stdin = idSequences.map((seq) => seq.join(" ")).join("\n") + "\n";
  const args = ["parse", "--ids", "--mode", opts?.mode ?? "strict", ...coreFlags(opts)];
  if (opts?.style) {
    args.push("--style", opts.style);
  }
  const out = runCli(args, opts, stdin);
  return lines(out).map((line) => JSON.parse(line) as SceneDoc);
}

/** Jaccard evaluation of predicted vs ground-truth scenes. */
export function bindEval(
  gtScenes: SceneDoc[],
  predScenes: SceneDoc[],
  dataset: string,
  taus?: number[],
  opts?: CoreOptions,
): EvalReport {
  const dir = mkdtempSync(join(tmpdir(), "scenetok-bind-"));
  try {
    const gtPath = join(dir, "gt.jsonl");
    const predPath = join(dir, "pred.jsonl");
    writeFileSync(gtPath, gtScenes.map((s) => JSON.stringify(s)).join("\n") + "\n");
    writeFileSync(predPath, predScenes.map((s) => JSON.stringify(s)).join("\n") + "\n");
    const args = ["eval", "jaccard", "--gt", gtPath, "--pred", predPath, "--dataset", dataset];
    if (taus && taus.length > 0) {
      args.push("--tau", taus.join(","));
    }
    return JSON.parse(runCli(args, opts)) as EvalReport;
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

/** Build the unified vocabulary and return its parsed manifest. */
export function bindVocab(opts?: CoreOptions): VocabManifest {
  const text = runCli(["vocab", ...coreFlags(opts)], opts);
  const headers: Record<string, number> = {};
  const rows: Array<[number, string]> = [];
  for (const line of text.split("\n")) {
    if (line.startsWith("#")) {
      const space = line.indexOf(" ");
      if (space > 1) {
        headers[line.slice(1, space)] = Number(line.slice(space + 1));
      }
    } else if (line.includes("\t")) {
      const tab = line.indexOf("\t");
      rows.push([Number(line.slice(0, tab)), line.slice(tab + 1)]);
    }
  }
  return {
    baseSize: headers["base_size"],
    imageCodes: headers["image_codes"],
    shapeCodes: headers["shape_codes"],
    totalSize: headers["total_size"],
    rows,
  };
}

/** Version string reported by the native core (must match VERSION). */
export function coreVersion(opts?: CoreOptions): string {
  return runCli(["--version"], opts).trim().split(" ").pop() ?? "";
}

/** Decode the STK1 binary token-stream format. */
export function readIdStream(data: Buffer): number[][] {
  if (data.length < 4 || data.toString("latin1", 0, 4) !== "STK1") {
    throw new Error("not an STK1 token stream");
  }
  let offset = 4;
  const readVarint = (): number => {
    let value = 0;
    let shift = 0;
    for (;;) {
      if (offset >= data.length) {
        throw new Error("truncated varint");
      }
      const byte = data[offset];
      offset += 1;
      value += (byte & 0x7f) * 2 ** shift;
      if ((byte & 0x80) === 0) {
        return value;
      }
      shift += 7;
    }
  };
  const records: number[][] = [];
  while (offset < data.length) {
    const count = readVarint();
    const ids: number[] = [];
    for (let i = 0; i < count; i += 1) {
      ids.push(readVarint());
    }
    records.push(ids);
  }
  return records;
}
