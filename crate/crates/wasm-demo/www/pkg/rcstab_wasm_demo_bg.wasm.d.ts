/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const demo_forecast: (a: number) => [number, number];
export const demo_grid_points: (a: number) => number;
export const demo_new: (a: bigint, b: number, c: number) => [number, number, number];
export const demo_spectra: (a: number, b: number) => [number, number, number, number];
export const demo_steps: (a: number) => number;
export const demo_train: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number];
export const demo_truth: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
