/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_simulationresult_free: (a: number, b: number) => void;
export const barrier_gain_curve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const certify: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number) => [number, number, number, number];
export const simulate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
export const simulationresult_e1: (a: number) => [number, number];
export const simulationresult_e2: (a: number) => [number, number];
export const simulationresult_status: (a: number) => [number, number];
export const simulationresult_t: (a: number) => [number, number];
export const simulationresult_tau1: (a: number) => [number, number];
export const simulationresult_tau2: (a: number) => [number, number];
export const simulationresult_v: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
