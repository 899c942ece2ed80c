#!/usr/bin/env node
// Plot CLI: plot-tuning | plot-training | plot-eval, each with --in/--out.

import { plotEvaluation } from "./evaluation";
import { DEFAULT_SMA_WINDOW, plotTraining } from "./training";
import { plotTuning } from "./tuning";

interface Flags {
  in?: string;
  out?: string;
  window?: number;
}

function parseFlags(argv: string[]): Flags {
  const flags: Flags = {};
  for (let i = 0; i < argv.length; i += 2) {
    const name = argv[i];
    const value = argv[i + 1];
    if (value === undefined) throw new Error(`flag ${name} needs a value`);
    if (name === "--in") flags.in = value;
    else if (name === "--out") flags.out = value;
    else if (name === "--window") flags.window = Number(value);
    else throw new Error(`unknown flag ${name}`);
  }
  if (!flags.in || !flags.out) throw new Error("--in and --out are required");
  return flags;
}

const USAGE = `usage:
  offloadsim-plots plot-tuning   --in <tune campaign dir>  --out <dir>
  offloadsim-plots plot-training --in <train campaign dir> --out <dir> [--window N]
  offloadsim-plots plot-eval     --in <eval root dir>      --out <dir>`;

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    const flags = parseFlags(rest);
    let written: string[];
    if (command === "plot-tuning") {
      written = [plotTuning(flags.in!, flags.out!)];
    } else if (command === "plot-training") {
      written = [plotTraining(flags.in!, flags.out!, flags.window ?? DEFAULT_SMA_WINDOW)];
    } else if (command === "plot-eval") {
      written = plotEvaluation(flags.in!, flags.out!);
    } else {
      console.error(USAGE);
      return 2;
    }
    for (const file of written) console.log(`wrote ${file}`);
    return 0;
  } catch (error) {
    console.error(String(error instanceof Error ? error.message : error));
    if (command === undefined) console.error(USAGE);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
