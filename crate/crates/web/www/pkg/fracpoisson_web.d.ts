/* tslint:disable */
/* eslint-disable */

/**
 * Pairs (s, s·K(s)) of the subordination kernel on a log grid around s = τ²/4.
 */
export function kernel_curve(alpha: number, tau: number, points: number): Float64Array;

/**
 * Pairs (ρ, |m_N(ρ)|) for the window (−M, M) of a^j, on the window's frequency range.
 */
export function multiplier_modulus(alpha: number, base: number, m: number, alternating: boolean): Float64Array;

/**
 * Rows (t, f(t), T*_M f(t), T_{(−M,M)} f(t)) on [lo, hi] with the given step.
 */
export function tstar_field(_function: string, alpha: number, base: number, m: number, alternating: boolean, lo: number, hi: number, step: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly kernel_curve: (a: number, b: number, c: number) => [number, number, number, number];
    readonly multiplier_modulus: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly tstar_field: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
