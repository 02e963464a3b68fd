/* tslint:disable */
/* eslint-disable */

/**
 * A trained reservoir together with its data.
 */
export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Forecast field in physical units, row-major. Shorter than the truth
     * when the forecast overflowed.
     */
    forecast(): Float64Array;
    grid_points(): number;
    constructor(seed: bigint, train_steps: number, test_steps: number);
    spectra(window: number): Float64Array;
    steps(): number;
    train(method: Method, nodes: number, log10_beta: number, log10_beta_t: number, reservoir_seed: bigint): number;
    /**
     * True test field after synchronization, row-major `steps × grid_points`.
     */
    truth(): Float64Array;
}

export enum Method {
    None = 0,
    Tikhonov = 1,
    Lmnt = 2,
    LmntReduced = 3,
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_forecast: (a: number) => [number, number];
    readonly demo_grid_points: (a: number) => number;
    readonly demo_new: (a: bigint, b: number, c: number) => [number, number, number];
    readonly demo_spectra: (a: number, b: number) => [number, number, number, number];
    readonly demo_steps: (a: number) => number;
    readonly demo_train: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number];
    readonly demo_truth: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
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
