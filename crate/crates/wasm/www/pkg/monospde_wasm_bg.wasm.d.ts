/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_coupling_free: (a: number, b: number) => void;
export const __wbg_path_free: (a: number, b: number) => void;
export const couplingCurve: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const coupling_bound: (a: number) => [number, number];
export const coupling_gamma6: (a: number) => number;
export const coupling_meanSqDiff: (a: number) => [number, number];
export const coupling_pathwiseViolations: (a: number) => number;
export const coupling_times: (a: number) => [number, number];
export const marginsVsAlpha: (a: number, b: number, c: number) => [number, number, number, number];
export const path_finalState: (a: number) => [number, number];
export const path_l2: (a: number) => [number, number];
export const path_nodes: (a: number) => [number, number];
export const path_times: (a: number) => [number, number];
export const simulatePath: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
