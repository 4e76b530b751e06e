#!/usr/bin/env node
/** CLI: `hologate-figs render <figspec.json>`.
 *
 * A figure spec names an input table produced by the simulation CLI, a
 * figure kind, and an output SVG path.  Rendering never recomputes physics:
 * every number on a figure exists in the input file.
 */

import { readFileSync } from "fs";

import { figureSpecSchema } from "./figspec.js";
import { CsvError, renderFigure } from "./render.js";

function fail(message: string): never {
  process.stderr.write(JSON.stringify({ error: message }) + "\n");
  process.exit(1);
}

function main(argv: string[]): void {
  if (argv.length !== 2 || argv[0] !== "render") {
    fail("usage: hologate-figs render <figspec.json>");
  }
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(argv[1], "utf8"));
  } catch (exc) {
    fail(`cannot read spec: ${String(exc)}`);
  }
  const parsed = figureSpecSchema.safeParse(raw);
  if (!parsed.success) {
    fail(`invalid figure spec: ${parsed.error.issues[0].message}`);
  }
  try {
    renderFigure(parsed.data);
  } catch (exc) {
    if (exc instanceof CsvError) fail(exc.message);
    fail(String(exc));
  }
  process.stdout.write(`${parsed.data.output}\n`);
}

main(process.argv.slice(2));
