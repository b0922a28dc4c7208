/* tslint:disable */
/* eslint-disable */

/**
 * A generated corpus and the model trained on it.
 */
export class Session {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * `method` is `"gaussian"` or `"sampling"`.
     */
    document(index: number, method: string): string;
    elboTrace(): Float64Array;
    /**
     * CorLoc report over the whole corpus.
     */
    evaluate(method: string): string;
    /**
     * Generates a corpus (3 classes, 2 background topics) and trains on it.
     */
    constructor(seed: number, docs: number, unlabelled_fraction: number, spatial: boolean);
    numDocuments(): number;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_session_free: (a: number, b: number) => void;
    readonly session_document: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly session_elboTrace: (a: number) => [number, number];
    readonly session_evaluate: (a: number, b: number, c: number) => [number, number, number, number];
    readonly session_new: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly session_numDocuments: (a: number) => number;
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
