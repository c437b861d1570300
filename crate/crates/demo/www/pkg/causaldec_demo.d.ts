/* tslint:disable */
/* eslint-disable */

/**
 * Betti numbers of the spacetime for all four support classes.
 */
export function betti_profiles(sigma: string, slices: number, collar: number): string;

/**
 * Causal propagator `G = G₊ − G₋` of a unit 0-form source on the middle
 * slice of `time(slices, 2) × sigma`, as slice-by-vertex f64 rows.
 */
export function green_wave(sigma: string, slices: number): string;

/**
 * SC × TC pairing matrices with the slice isomorphisms behind them.
 */
export function pairing_view(sigma: string, slices: number, collar: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly betti_profiles: (a: number, b: number, c: number, d: number) => [number, number];
    readonly green_wave: (a: number, b: number, c: number) => [number, number];
    readonly pairing_view: (a: number, b: number, c: number, d: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
