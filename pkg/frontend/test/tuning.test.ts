import assert from "node:assert/strict";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { test } from "node:test";

import { readCsv } from "../src/csv";
import { loadTuning, renderTuning } from "../src/tuning";
import { FIXTURES, shapesOf } from "./helpers";

const TUNE_DIR = path.join(FIXTURES, "tune");

test("the nine-combination fixture renders nine bars", () => {
  const svg = renderTuning(loadTuning(TUNE_DIR));
  assert.equal(shapesOf(svg, "tuning-bar").length, 9);
  assert.equal(shapesOf(svg, "tuning-whisker").length, 9);
});

test("bar heights and whiskers equal the aggregate CSV values", () => {
  const svg = renderTuning(loadTuning(TUNE_DIR));
  const fromCsv = new Map(
    readCsv(path.join(TUNE_DIR, "tuning_combos.csv")).map((row) => [
      row.combo as string,
      { mean: row.mean_total_return as number, hw: row.ci_half_width as number },
    ])
  );
  const bars = shapesOf(svg, "tuning-bar");
  assert.equal(bars.length, fromCsv.size);
  for (const bar of bars) {
    const expected = fromCsv.get(bar.attrs["data-combo"]);
    assert.ok(expected, `unknown combo ${bar.attrs["data-combo"]}`);
    assert.equal(Number(bar.attrs["data-mean"]), expected!.mean);
    assert.equal(Number(bar.attrs["data-halfwidth"]), expected!.hw);
  }
  for (const whisker of shapesOf(svg, "tuning-whisker")) {
    const expected = fromCsv.get(whisker.attrs["data-combo"]);
    assert.equal(Number(whisker.attrs["data-halfwidth"]), expected!.hw);
  }
});

test("per-agent bands carry the CSV confidence half-widths", () => {
  const data = loadTuning(TUNE_DIR);
  const svg = renderTuning(data);
  for (const band of shapesOf(svg, "tuning-band")) {
    const agent = band.attrs["data-agent"];
    const expected = data.perAgent.get(agent)!.map((s) => s.halfWidth);
    const got = band.attrs["data-halfwidths"].split(";").map(Number);
    assert.deepEqual(got, expected);
  }
  assert.ok(shapesOf(svg, "tuning-agent-line").length >= 1);
});

test("constant synthetic returns produce zero-height whiskers", () => {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "tune-"));
  const combos = ["alr_1__clr_1", "alr_1__clr_2"];
  fs.writeFileSync(
    path.join(dir, "tuning_combos.csv"),
    "combo,actor_lr,critic_lr,mean_total_return,ci_half_width\n" +
      combos.map((c, i) => `${c},1,${i + 1},5.0,0.0`).join("\n") + "\n"
  );
  for (const combo of combos) {
    fs.mkdirSync(path.join(dir, combo));
    fs.writeFileSync(
      path.join(dir, combo, "aggregate.csv"),
      "metric,mean,ci_half_width,episodes,degenerate\n" +
        "total_return,5.0,0.0,3,false\nreturn_dc1,5.0,0.0,3,false\n"
    );
  }
  const svg = renderTuning(loadTuning(dir));
  for (const whisker of shapesOf(svg, "tuning-whisker")) {
    assert.equal(Number(whisker.attrs["data-halfwidth"]), 0);
    assert.equal(whisker.attrs.y1, whisker.attrs.y2);
  }
});

test("a combo without its aggregate file fails loudly", () => {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "tune-"));
  fs.writeFileSync(
    path.join(dir, "tuning_combos.csv"),
    "combo,actor_lr,critic_lr,mean_total_return,ci_half_width\n" +
      "alr_1__clr_1,1,1,5.0,0.0\n"
  );
  assert.throws(() => loadTuning(dir), /alr_1__clr_1/);
});

test("rendering is deterministic", () => {
  const data = loadTuning(TUNE_DIR);
  assert.equal(renderTuning(data), renderTuning(data));
});
