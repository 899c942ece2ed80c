// Minimal CSV reader for the simulator's log files: header row, comma
// separated, no quoting (the emitters never produce embedded commas),
// empty cells mean "undefined".

import * as fs from "node:fs";

export type Cell = number | string | boolean | null;
export type Row = Record<string, Cell>;

export function parseCell(text: string): Cell {
  if (text === "") return null;
  if (text === "true") return true;
  if (text === "false") return false;
  const value = Number(text);
  return Number.isNaN(value) ? text : value;
}

export function parseCsv(text: string): Row[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) return [];
  const header = lines[0].split(",");
  return lines.slice(1).map((line) => {
    const cells = line.split(",");
    const row: Row = {};
    header.forEach((name, i) => {
      row[name] = parseCell(cells[i] ?? "");
    });
    return row;
  });
}

export function readCsv(path: string): Row[] {
  return parseCsv(fs.readFileSync(path, "utf8"));
}

export function asNumber(cell: Cell, context: string): number {
  if (typeof cell !== "number") {
    throw new Error(`expected a number for ${context}, got ${String(cell)}`);
  }
  return cell;
}

export function asString(cell: Cell, context: string): string {
  if (typeof cell !== "string") {
    throw new Error(`expected a string for ${context}, got ${String(cell)}`);
  }
  return cell;
}
