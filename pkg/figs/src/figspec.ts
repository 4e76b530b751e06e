import { z } from "zod";

export const FIGURE_KINDS = [
  "radial-integrand",
  "error-scaling",
  "time-sweep",
  "gap-curve",
  "loop-diagram",
] as const;

export const figureSpecSchema = z
  .object({
    kind: z.enum(FIGURE_KINDS),
    input: z.string().min(1),
    output: z.string().min(1),
    title: z.string().optional(),
    logx: z.boolean().optional(),
    logy: z.boolean().optional(),
    width: z.number().int().positive().optional(),
    height: z.number().int().positive().optional(),
  })
  .strict();

export type FigureSpec = z.infer<typeof figureSpecSchema>;

/** Columns each figure kind requires from its input CSV. */
export const REQUIRED_COLUMNS: Record<string, string[]> = {
  "radial-integrand": ["r", "C1", "C2"],
  "error-scaling": ["R", "beta", "epsilon", "dalpha1", "dalpha2", "bound1", "bound2", "F_exact", "F_expansion"],
  "time-sweep": ["t1", "t2", "gamma", "R", "W", "schedule", "T", "fidelity", "leakage"],
  "gap-curve": ["W", "gap_arc", "gap_min_path", "asymptotic_gap", "quintic_mismatch"],
  "loop-diagram": ["t", "re", "im"],
};
