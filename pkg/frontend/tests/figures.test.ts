import fs from "fs";
import os from "os";
import path from "path";
import { describe, expect, it } from "vitest";

import { countLayers, render } from "../src/figures";
import { renderSpecFile } from "../src/render";
import { FigureSpec } from "../src/types";

const FIX = path.join(__dirname, "..", "fixtures");

function loadSpec(name: string): FigureSpec {
  const raw = JSON.parse(
    fs.readFileSync(path.join(FIX, name), "utf-8"));
  const rebase = (r: any) => ({ ...r, path: path.join(FIX, r.path) });
  if (raw.trajectories) raw.trajectories = raw.trajectories.map(rebase);
  if (raw.curves) raw.curves = raw.curves.map(rebase);
  if (raw.references) raw.references = raw.references.map(rebase);
  if (raw.markers) raw.markers = rebase(raw.markers);
  if (raw.input) raw.input = path.join(FIX, raw.input);
  return raw as FigureSpec;
}

describe("sphere trajectory figure", () => {
  const spec = loadSpec("fig_sphere.json");
  const svg = render(spec);

  it("contains one trajectory layer per initialization scale", () => {
    expect(countLayers(svg, "trajectory")).toBe(3);
  });

  it("contains the penalty-path marker layer with all four mu labels", () => {
    expect(countLayers(svg, "markers")).toBe(1);
    for (const mu of ["0.5", "0.1", "0.01", "0.001"]) {
      expect(svg).toContain(`>${mu}</text>`);
    }
  });

  it("contains a reference star per optimum", () => {
    expect(countLayers(svg, "reference")).toBe(2);
    expect(svg).toContain('data-label="l1"');
    expect(svg).toContain('data-label="l2"');
  });

  it("annotates requested gamma_tilde values", () => {
    expect(svg).toContain(">1000</text>");
  });

  it("is deterministic", () => {
    expect(render(spec)).toBe(svg);
  });
});

describe("excess-norm curves figure", () => {
  const spec = loadSpec("fig_excess_curves.json");
  const svg = render(spec);

  it("contains one curve per (alpha^D, depth) input", () => {
    expect(countLayers(svg, "curve")).toBe(6);
  });

  it("labels each curve", () => {
    expect(svg).toContain('data-label="a^D=1 D=10"');
  });
});

describe("accuracy-vs-initialization figure", () => {
  const spec = loadSpec("fig_acc_vs_init.json");
  const svg = render(spec);

  it("draws points and a fitted line per depth", () => {
    expect(countLayers(svg, "points")).toBe(3);
    expect(countLayers(svg, "fit")).toBe(3);
  });

  it("overlays the fit exactly on synthetic exact-line data", () => {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), "figs-"));
    const input = path.join(dir, "line.json");
    // points generated from the line y = 2x + 1, fit parameters matching
    const pts: [number, number][] = [[0, 1], [1, 3], [2, 5]];
    fs.writeFileSync(input, JSON.stringify({
      series: [{ label: "exact", points: pts,
                 fit: { slope: 2, intercept: 1 } }],
    }));
    const svgLine = render({
      kind: "acc_vs_init", input, out: path.join(dir, "o.svg"),
    });
    // the fitted segment spans the x-domain, so its endpoints coincide
    // with the extreme points; their pixel coordinates must appear in
    // both the point markers and the line path
    const match = svgLine.match(/<path d="M([\d.]+),([\d.]+)L([\d.]+),([\d.]+)"/);
    expect(match).not.toBeNull();
    const [x0, y0, x1, y1] = match!.slice(1).map(Number);
    expect(svgLine).toContain(`${x0.toFixed(2)}`);
    // endpoints of the fit line equal the scaled extreme points
    const width = 560, height = 420, margin = 45;
    expect(x0).toBeCloseTo(margin, 5);
    expect(x1).toBeCloseTo(width - margin, 5);
    expect(y0).toBeCloseTo(height - margin, 5);  // (0,1) is the minimum
    expect(y1).toBeCloseTo(margin, 5);           // (2,5) is the maximum
  });
});

describe("kernel-distance figure", () => {
  const spec = loadSpec("fig_kernel_dist.json");
  const svg = render(spec);

  it("contains one curve per depth", () => {
    expect(countLayers(svg, "curve")).toBe(3);
  });
});

describe("excess-plane figure", () => {
  const spec = loadSpec("fig_excess_plane.json");
  const svg = render(spec);

  it("contains one trajectory per initialization scale", () => {
    expect(countLayers(svg, "trajectory")).toBe(2);
  });
});

describe("degenerate and invalid inputs", () => {
  it("renders a single-row trajectory without error", () => {
    const spec = loadSpec("fig_one_row.json");
    const svg = render(spec);
    expect(countLayers(svg, "trajectory")).toBe(1);
    expect(svg).toContain("<circle");  // one point, drawn as a dot
  });

  it("rejects inputs with missing columns", () => {
    const spec = loadSpec("fig_kernel_dist.json") as any;
    spec.column = "no_such_metric";
    expect(() => render(spec)).toThrow(/missing column/);
  });
});

describe("self-test mode", () => {
  it("passes layer-count assertions on the bundled specs", () => {
    for (const name of ["fig_sphere.json", "fig_excess_curves.json",
                        "fig_acc_vs_init.json", "fig_kernel_dist.json",
                        "fig_excess_plane.json"]) {
      expect(renderSpecFile(path.join(FIX, name), true)).toBe(0);
    }
  });
});
