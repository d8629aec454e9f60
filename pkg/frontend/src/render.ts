/** Render one figure from a FigureSpec JSON file.
 *
 * Usage:
 *   ts-node src/render.ts spec.json            # write the SVG
 *   ts-node src/render.ts --self-test spec.json
 *
 * Self-test mode renders, writes, re-reads the output, and asserts that
 * every declared layer is present the expected number of times.
 */

import fs from "fs";
import path from "path";

import { countLayers, expectedLayers, render } from "./figures";
import { FigureSpec } from "./types";

export function renderSpecFile(specPath: string,
                               selfTest: boolean): number {
  const spec: FigureSpec = JSON.parse(fs.readFileSync(specPath, "utf-8"));
  const base = path.dirname(path.resolve(specPath));
  const resolve = (p: string) =>
    path.isAbsolute(p) ? p : path.join(base, p);
  // input paths in the spec are relative to the spec file
  const anySpec = spec as any;
  for (const key of ["trajectories", "curves", "references"]) {
    if (Array.isArray(anySpec[key])) {
      anySpec[key] = anySpec[key].map((r: any) =>
        ({ ...r, path: resolve(r.path) }));
    }
  }
  if (anySpec.markers) {
    anySpec.markers = { ...anySpec.markers,
                        path: resolve(anySpec.markers.path) };
  }
  if (anySpec.input) {
    anySpec.input = resolve(anySpec.input);
  }
  anySpec.out = resolve(anySpec.out);

  const svg = render(spec);
  fs.mkdirSync(path.dirname(anySpec.out), { recursive: true });
  fs.writeFileSync(anySpec.out, svg);
  console.log(`wrote ${anySpec.out} (${svg.length} bytes)`);

  if (!selfTest) {
    return 0;
  }
  const written = fs.readFileSync(anySpec.out, "utf-8");
  let ok = true;
  for (const [name, expected] of Object.entries(expectedLayers(spec))) {
    const got = countLayers(written, name);
    const pass = got === expected;
    ok = ok && pass;
    console.log(`[${pass ? "PASS" : "FAIL"}] layer '${name}': `
      + `expected ${expected}, found ${got}`);
  }
  return ok ? 0 : 1;
}

function main(argv: string[]): number {
  const selfTest = argv.includes("--self-test");
  const files = argv.filter((a) => a !== "--self-test");
  if (files.length === 0) {
    console.error("usage: render.ts [--self-test] spec.json [...]");
    return 2;
  }
  let code = 0;
  for (const file of files) {
    code = Math.max(code, renderSpecFile(file, selfTest));
  }
  return code;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
