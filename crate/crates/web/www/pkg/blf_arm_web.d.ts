/* tslint:disable */
/* eslint-disable */

/**
 * Downsampled closed-loop signals. Angles are in degrees.
 */
export class SimulationResult {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly e1: Float64Array;
    readonly e2: Float64Array;
    /**
     * `ok`, or a description of why the run stopped.
     */
    readonly status: string;
    readonly t: Float64Array;
    readonly tau1: Float64Array;
    readonly tau2: Float64Array;
    readonly v: Float64Array;
}

export function barrier_gain_curve(barrier: number, delta_deg: number, variant: string, points: number): Float64Array;

export function certify(k1: number, k2: number, barrier: number, delta_deg: number, e0_deg: number, variant: string, zeta1: number, zeta2: number, kn: number): string;

export function simulate(k1: number, k2: number, barrier: number, delta_deg: number, e0_deg: number, variant: string, tau_max: number, horizon: number): SimulationResult;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_simulationresult_free: (a: number, b: number) => void;
    readonly barrier_gain_curve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly certify: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number) => [number, number, number, number];
    readonly simulate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
    readonly simulationresult_e1: (a: number) => [number, number];
    readonly simulationresult_e2: (a: number) => [number, number];
    readonly simulationresult_status: (a: number) => [number, number];
    readonly simulationresult_t: (a: number) => [number, number];
    readonly simulationresult_tau1: (a: number) => [number, number];
    readonly simulationresult_tau2: (a: number) => [number, number];
    readonly simulationresult_v: (a: number) => [number, number];
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
