/* tslint:disable */
/* eslint-disable */

/**
 * Classifies a matrix given as `{"rows": ...}` or `{"alpha": ...}`.
 */
export function classifyMatrix(json: string, tolerance: number): string;

/**
 * Solves a game `{"X", "P", "G"}` and returns the payoff of every profile
 * together with the Nash payoff.
 */
export function solveGame(json: string, tolerance: number): string;

/**
 * Generates a seeded binary scenario tree and solves it.
 */
export function solveRandomTree(seed: number, players: number, horizon: number, tolerance: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly classifyMatrix: (a: number, b: number, c: number) => [number, number, number, number];
    readonly solveGame: (a: number, b: number, c: number) => [number, number, number, number];
    readonly solveRandomTree: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
