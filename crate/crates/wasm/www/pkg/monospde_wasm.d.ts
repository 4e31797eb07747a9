/* tslint:disable */
/* eslint-disable */

export class Coupling {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly bound: Float64Array;
    readonly gamma6: number;
    readonly meanSqDiff: Float64Array;
    readonly pathwiseViolations: number;
    readonly times: Float64Array;
}

export class Path {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly finalState: Float64Array;
    readonly l2: Float64Array;
    readonly nodes: Float64Array;
    readonly times: Float64Array;
}

export function couplingCurve(alpha: number, n_cells: number, tau: number, n_steps: number, n_paths: number, seed: number): Coupling;

/**
 * Flat `[alpha_0, contraction_0, stability_0, alpha_1, ...]`.
 */
export function marginsVsAlpha(alpha_min: number, alpha_max: number, n: number): Float64Array;

export function simulatePath(alpha: number, n_cells: number, tau: number, n_steps: number, seed: number): Path;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_coupling_free: (a: number, b: number) => void;
    readonly __wbg_path_free: (a: number, b: number) => void;
    readonly couplingCurve: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly coupling_bound: (a: number) => [number, number];
    readonly coupling_gamma6: (a: number) => number;
    readonly coupling_meanSqDiff: (a: number) => [number, number];
    readonly coupling_pathwiseViolations: (a: number) => number;
    readonly coupling_times: (a: number) => [number, number];
    readonly marginsVsAlpha: (a: number, b: number, c: number) => [number, number, number, number];
    readonly path_finalState: (a: number) => [number, number];
    readonly path_l2: (a: number) => [number, number];
    readonly path_nodes: (a: number) => [number, number];
    readonly path_times: (a: number) => [number, number];
    readonly simulatePath: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
