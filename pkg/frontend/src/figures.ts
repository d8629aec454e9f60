import { column, readCsv, readJson, wVectors } from "./io";
import {
  PALETTE,
  axesLayer,
  document as svgDocument,
  extent,
  layer,
  legendLayer,
  makeFrame,
  polylineEl,
  star,
  text,
} from "./svg";
import {
  AccVsInitSeries,
  AccVsInitSpec,
  CurvesSpec,
  ExcessPlaneSpec,
  FigureSpec,
  SphereTrajSpec,
} from "./types";

const DEG = 180 / Math.PI;

/** The declared axis transform for sphere figures: a normalized classifier
 * drawn as (azimuth, pitch) in degrees. */
export function azimuthPitch(w: number[]): [number, number] {
  const norm = Math.hypot(...w);
  if (norm === 0) {
    throw new Error("zero predictor has no direction");
  }
  if (w[0] === 0 && w[1] === 0) {
    return [0, (Math.sign(w[2]) * 90) as number];
  }
  return [Math.atan2(w[1], w[0]) * DEG, Math.asin(w[2] / norm) * DEG];
}

/** Trajectories start at w = 0, which has no direction; those rows are
 * skipped rather than drawn. */
function drawableRows(ws: number[][]): number[] {
  const out: number[] = [];
  ws.forEach((w, i) => {
    if (Math.hypot(...w) > 0) {
      out.push(i);
    }
  });
  return out;
}

function maybeLog(values: number[], log?: boolean): number[] {
  return log ? values.map((v) => Math.log10(v)) : values;
}

export function renderSphereTraj(spec: SphereTrajSpec): string {
  const width = spec.width ?? 640;
  const height = spec.height ?? 480;
  const series = spec.trajectories.map((ref) => {
    const table = readCsv(ref.path);
    const ws = wVectors(table, ref.path);
    const keep = drawableRows(ws);
    const gts = column(table, "gamma_tilde", ref.path);
    return {
      ref,
      coords: keep.map((i) => azimuthPitch(ws[i])),
      gamma_tilde: keep.map((i) => gts[i]),
    };
  });
  const markerRows = spec.markers
    ? (() => {
        const table = readCsv(spec.markers.path);
        return {
          mus: column(table, "mu", spec.markers.path),
          coords: wVectors(table, spec.markers.path).map(azimuthPitch),
        };
      })()
    : undefined;
  const refs = (spec.references ?? []).map((ref) => ({
    ref,
    coord: azimuthPitch(readJson(ref.path).w as number[]),
  }));

  const allAz = series.flatMap((s) => s.coords.map((c) => c[0]))
    .concat(markerRows ? markerRows.coords.map((c) => c[0]) : [])
    .concat(refs.map((r) => r.coord[0]));
  const allPitch = series.flatMap((s) => s.coords.map((c) => c[1]))
    .concat(markerRows ? markerRows.coords.map((c) => c[1]) : [])
    .concat(refs.map((r) => r.coord[1]));
  const frame = makeFrame(width, height, extent(allAz), extent(allPitch));

  const layers: string[] = [axesLayer(frame, "azimuth (deg)", "pitch (deg)")];
  series.forEach((s, i) => {
    const pts = s.coords.map(
      ([a, p]) => [frame.x(a), frame.y(p)] as [number, number]);
    let body = polylineEl(pts, PALETTE[i % PALETTE.length]);
    for (const target of spec.gamma_labels ?? []) {
      let best = -1;
      for (let k = 0; k < s.gamma_tilde.length; k++) {
        if (s.gamma_tilde[k] >= target) {
          best = k;
          break;
        }
      }
      if (best >= 0) {
        body += text(pts[best][0] + 3, pts[best][1] - 3, `${target}`, 8);
      }
    }
    layers.push(layer("trajectory", s.ref.label, body));
  });
  if (markerRows) {
    const body = markerRows.coords
      .map(([a, p], i) =>
        star(frame.x(a), frame.y(p), 4, "#e377c2")
        + text(frame.x(a) + 5, frame.y(p) - 5, `${markerRows.mus[i]}`, 8))
      .join("");
    layers.push(layer("markers", spec.markers!.label, body));
  }
  refs.forEach((r, i) => {
    const [a, p] = r.coord;
    layers.push(layer(
      "reference", r.ref.label,
      star(frame.x(a), frame.y(p), 7,
           PALETTE[(series.length + i) % PALETTE.length])
      + text(frame.x(a) + 8, frame.y(p) + 4, r.ref.label, 9)));
  });
  layers.push(legendLayer(
    series.map((s, i) =>
      [s.ref.label, PALETTE[i % PALETTE.length]] as [string, string]),
    frame));
  return svgDocument(width, height, spec.title ?? "", layers.join(""));
}

export function renderCurves(spec: CurvesSpec): string {
  const width = spec.width ?? 640;
  const height = spec.height ?? 420;
  const col = spec.column
    ?? (spec.kind === "kernel_dist" ? "kernel_distance" : "excess_l1");
  const series = spec.curves.map((ref) => {
    const table = readCsv(ref.path);
    const xs = column(table, "gamma_tilde", ref.path);
    const ys = column(table, col, ref.path);
    const keep = xs.map((x, i) => [x, ys[i]] as [number, number])
      .filter(([x, y]) => Number.isFinite(x) && Number.isFinite(y)
        && (!spec.logx || x > 0) && (!spec.logy || y > 0));
    return { ref, pts: keep };
  });
  const xsAll = series.flatMap((s) => maybeLog(s.pts.map((p) => p[0]),
                                               spec.logx));
  const ysAll = series.flatMap((s) => maybeLog(s.pts.map((p) => p[1]),
                                               spec.logy));
  const frame = makeFrame(width, height, extent(xsAll), extent(ysAll));
  const xLabel = (spec.logx ? "log10 " : "") + "gamma_tilde";
  const yLabel = (spec.logy ? "log10 " : "") + col;
  const layers = [axesLayer(frame, xLabel, yLabel)];
  series.forEach((s, i) => {
    const pts = s.pts.map(([x, y]) => [
      frame.x(spec.logx ? Math.log10(x) : x),
      frame.y(spec.logy ? Math.log10(y) : y),
    ] as [number, number]);
    layers.push(layer("curve", s.ref.label,
                      polylineEl(pts, PALETTE[i % PALETTE.length])));
  });
  layers.push(legendLayer(
    series.map((s, i) =>
      [s.ref.label, PALETTE[i % PALETTE.length]] as [string, string]),
    frame));
  return svgDocument(width, height, spec.title ?? "", layers.join(""));
}

export function renderAccVsInit(spec: AccVsInitSpec): string {
  const width = spec.width ?? 560;
  const height = spec.height ?? 420;
  const payload = readJson(spec.input);
  const series: AccVsInitSeries[] = payload.series;
  if (!series || series.length === 0) {
    throw new Error(`${spec.input}: no series`);
  }
  const xsAll = series.flatMap((s) => s.points.map((p) => p[0]));
  const ysAll = series.flatMap((s) => s.points.map((p) => p[1]));
  const frame = makeFrame(width, height, extent(xsAll), extent(ysAll));
  const layers = [
    axesLayer(frame, "log alpha^D", "log gamma_tilde at threshold"),
  ];
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const dots = s.points
      .map(([x, y]) => star(frame.x(x), frame.y(y), 4, color))
      .join("");
    layers.push(layer("points", s.label, dots));
    const [x0, x1] = frame.x.domain;
    const lineBody = polylineEl([
      [frame.x(x0), frame.y(s.fit.slope * x0 + s.fit.intercept)],
      [frame.x(x1), frame.y(s.fit.slope * x1 + s.fit.intercept)],
    ], color, 1.0);
    layers.push(layer("fit", s.label, lineBody));
  });
  layers.push(legendLayer(
    series.map((s, i) =>
      [s.label, PALETTE[i % PALETTE.length]] as [string, string]),
    frame));
  return svgDocument(width, height, spec.title ?? "", layers.join(""));
}

export function renderExcessPlane(spec: ExcessPlaneSpec): string {
  const width = spec.width ?? 560;
  const height = spec.height ?? 460;
  const series = spec.trajectories.map((ref) => {
    const table = readCsv(ref.path);
    const xs = column(table, "excess_l1", ref.path);
    const ys = column(table, "excess_l2", ref.path);
    const pts = xs.map((x, i) => [x, ys[i]] as [number, number])
      .filter(([x, y]) => Number.isFinite(x) && Number.isFinite(y));
    return { ref, pts };
  });
  const frame = makeFrame(
    width, height,
    extent(series.flatMap((s) => s.pts.map((p) => p[0]))),
    extent(series.flatMap((s) => s.pts.map((p) => p[1]))));
  const layers = [axesLayer(frame, "excess l1", "excess l2")];
  series.forEach((s, i) => {
    const pts = s.pts.map(
      ([x, y]) => [frame.x(x), frame.y(y)] as [number, number]);
    layers.push(layer("trajectory", s.ref.label,
                      polylineEl(pts, PALETTE[i % PALETTE.length])));
  });
  (spec.references ?? []).forEach((ref, i) => {
    const payload = readJson(ref.path);
    const [x, y] = payload.excess ?? [0, 0];
    layers.push(layer("reference", ref.label,
                      star(frame.x(x), frame.y(y), 7,
                           PALETTE[(series.length + i) % PALETTE.length])));
  });
  layers.push(legendLayer(
    series.map((s, i) =>
      [s.ref.label, PALETTE[i % PALETTE.length]] as [string, string]),
    frame));
  return svgDocument(width, height, spec.title ?? "", layers.join(""));
}

export function render(spec: FigureSpec): string {
  switch (spec.kind) {
    case "sphere_traj":
      return renderSphereTraj(spec);
    case "excess_curves":
    case "kernel_dist":
      return renderCurves(spec);
    case "acc_vs_init":
      return renderAccVsInit(spec);
    case "excess_plane":
      return renderExcessPlane(spec);
    default:
      throw new Error(`unknown figure kind ${(spec as any).kind}`);
  }
}

export function countLayers(svg: string, name: string): number {
  const needle = `class="layer layer-${name}"`;
  let count = 0;
  let at = svg.indexOf(needle);
  while (at >= 0) {
    count += 1;
    at = svg.indexOf(needle, at + needle.length);
  }
  return count;
}

/** Layer counts a correct rendering must contain, derived from the spec. */
export function expectedLayers(spec: FigureSpec): Record<string, number> {
  switch (spec.kind) {
    case "sphere_traj":
      return {
        trajectory: spec.trajectories.length,
        markers: spec.markers ? 1 : 0,
        reference: (spec.references ?? []).length,
        axes: 1,
      };
    case "excess_curves":
    case "kernel_dist":
      return { curve: spec.curves.length, axes: 1 };
    case "acc_vs_init": {
      const n = (readJson(spec.input).series ?? []).length;
      return { points: n, fit: n, axes: 1 };
    }
    case "excess_plane":
      return {
        trajectory: spec.trajectories.length,
        reference: (spec.references ?? []).length,
        axes: 1,
      };
  }
}
