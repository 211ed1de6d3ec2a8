import { readFileSync } from 'fs';

export const JOB_VERSION = '1';
export const BRANCHES = ['left_to_right', 'left_to_left'] as const;

export type Branch = (typeof BRANCHES)[number];

export interface JobManifest {
    version: string;
    branch: Branch;
    inputFrames: string;
    mask: string;
    outputFrames: string;
    width: number;
    height: number;
    frameCount: number;
    extras: Record<string, string>;
}

export class ShimError extends Error {
    readonly code: string;

    constructor(code: string, message: string) {
        super(message);
        this.code = code;
    }
}

function requireString(raw: Record<string, unknown>, key: string): string {
    const value = raw[key];
    if (typeof value !== 'string' || value.length === 0) {
        throw new ShimError('MalformedJob', `job field ${key} must be a non-empty string`);
    }
    return value;
}

function requirePositiveInt(raw: Record<string, unknown>, key: string): number {
    const value = raw[key];
    if (typeof value !== 'number' || !Number.isInteger(value) || value < 1) {
        throw new ShimError('MalformedJob', `job field ${key} must be a positive integer`);
    }
    return value;
}

export function loadJob(jobPath: string): JobManifest {
    let text: string;
    try {
        text = readFileSync(jobPath, 'utf-8');
    } catch (err) {
        throw new ShimError('IoError', `cannot read job manifest: ${err}`);
    }
    let raw: unknown;
    try {
        raw = JSON.parse(text);
    } catch (err) {
        throw new ShimError('MalformedJob', `job manifest is not valid JSON: ${err}`);
    }
    if (typeof raw !== 'object' || raw === null || Array.isArray(raw)) {
        throw new ShimError('MalformedJob', 'job manifest must be a JSON object');
    }
    const rec = raw as Record<string, unknown>;

    const version = requireString(rec, 'version');
    if (version !== JOB_VERSION) {
        throw new ShimError('MalformedJob', `unsupported job version ${version}`);
    }
    const branch = requireString(rec, 'branch');
    if (!(BRANCHES as readonly string[]).includes(branch)) {
        throw new ShimError('MalformedJob', `branch must be one of ${BRANCHES.join(', ')}`);
    }
    const extras: Record<string, string> = {};
    if (rec.extras !== undefined) {
        if (typeof rec.extras !== 'object' || rec.extras === null || Array.isArray(rec.extras)) {
            throw new ShimError('MalformedJob', 'job field extras must be an object');
        }
        for (const [key, value] of Object.entries(rec.extras)) {
            extras[key] = String(value);
        }
    }
    return {
        version,
        branch: branch as Branch,
        inputFrames: requireString(rec, 'input_frames'),
        mask: requireString(rec, 'mask'),
        outputFrames: requireString(rec, 'output_frames'),
        width: requirePositiveInt(rec, 'width'),
        height: requirePositiveInt(rec, 'height'),
        frameCount: requirePositiveInt(rec, 'frame_count'),
        extras,
    };
}

export function frameName(index: number): string {
    return `frame_${String(index).padStart(5, '0')}.png`;
}
