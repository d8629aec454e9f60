/** Figure specifications: which files to read and how to lay them out.
 *
 * Scripts are pure consumers of the simulator CLI's outputs; every number
 * plotted is read from the inputs, the only computation being the axis
 * transforms declared per figure kind (azimuth/pitch from w, log axes).
 */

export interface SeriesRef {
  /** CSV path (trajectory.csv / q_path.csv) or JSON path for solutions. */
  path: string;
  label: string;
}

export interface BaseSpec {
  out: string;
  width?: number;
  height?: number;
  title?: string;
}

/** Azimuth-pitch trajectories with penalty-path markers and reference
 * stars; w columns are transformed to (azimuth, pitch) in degrees. */
export interface SphereTrajSpec extends BaseSpec {
  kind: "sphere_traj";
  trajectories: SeriesRef[];
  /** q_path.csv: one marker per row, annotated with its mu value. */
  markers?: SeriesRef;
  /** solution_*.json files drawn as stars (e.g. the l1 and l2 optima). */
  references?: SeriesRef[];
  /** gamma_tilde values to annotate along each trajectory. */
  gamma_labels?: number[];
}

/** One metric column against gamma_tilde, one curve per input file. */
export interface CurvesSpec extends BaseSpec {
  kind: "excess_curves" | "kernel_dist";
  curves: SeriesRef[];
  /** metric column to plot (defaults: excess_l1 / kernel_distance). */
  column?: string;
  logx?: boolean;
  logy?: boolean;
}

export interface AccVsInitSeries {
  label: string;
  /** [log(alpha^D), log(gamma_tilde at threshold)] pairs. */
  points: [number, number][];
  fit: { slope: number; intercept: number };
}

/** Accuracy-vs-initialization points with their fitted lines, both read
 * from a JSON file produced by the analysis pipeline. */
export interface AccVsInitSpec extends BaseSpec {
  kind: "acc_vs_init";
  input: string;
}

/** Trajectories in the excess-l1 / excess-l2 plane. */
export interface ExcessPlaneSpec extends BaseSpec {
  kind: "excess_plane";
  trajectories: SeriesRef[];
  references?: SeriesRef[];
}

export type FigureSpec =
  | SphereTrajSpec
  | CurvesSpec
  | AccVsInitSpec
  | ExcessPlaneSpec;

export interface Table {
  columns: string[];
  rows: number[][];
}
