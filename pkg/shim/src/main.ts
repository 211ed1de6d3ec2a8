import { copyFileSync, mkdirSync } from 'fs';
import { join } from 'path';
import { parseArgs } from 'util';

import { maskedFill } from './fill';
import { frameName, loadJob, JobManifest, ShimError } from './job';
import { readMask, readRgb, writeRgb } from './png';

/**
 * A frame processor receives one decoded RGB frame plus its occlusion mask
 * (1 = pixel to synthesize) and returns the processed RGB bytes.  Mounting a
 * neural inpainting model means implementing this signature and registering
 * it under a new mode name; the protocol plumbing stays untouched.
 */
export type FrameProcessor = (
    frame: Buffer,
    mask: Uint8Array,
    width: number,
    height: number,
    frameIndex: number,
) => Buffer;

const PROCESSORS: Record<string, FrameProcessor> = {
    fill: (frame, mask, width, height) => maskedFill(frame, mask, width, height),
};

function requireDims(
    what: string,
    got: { width: number; height: number },
    job: JobManifest,
): void {
    if (got.width !== job.width || got.height !== job.height) {
        throw new ShimError(
            'DimensionMismatch',
            `${what} is ${got.width}x${got.height}, job declares ${job.width}x${job.height}`,
        );
    }
}

export function runJob(jobPath: string, mode: string): void {
    if (mode !== 'pass' && !(mode in PROCESSORS)) {
        throw new ShimError('UnknownMode', `mode must be pass or ${Object.keys(PROCESSORS).join(', ')}`);
    }
    const job = loadJob(jobPath);
    mkdirSync(job.outputFrames, { recursive: true });
    for (let i = 0; i < job.frameCount; i++) {
        const inputPath = join(job.inputFrames, frameName(i));
        const outputPath = join(job.outputFrames, frameName(i));
        const frame = readRgb(inputPath);
        requireDims(`input frame ${i}`, frame, job);
        if (mode === 'pass') {
            // byte-identical output, so copy the encoded file as-is
            copyFileSync(inputPath, outputPath);
            continue;
        }
        const mask = readMask(join(job.mask, frameName(i)));
        requireDims(`mask frame ${i}`, mask, job);
        const processed = PROCESSORS[mode](frame.pixels, mask.bits, job.width, job.height, i);
        writeRgb(outputPath, { width: job.width, height: job.height, pixels: processed });
    }
}

export function run(argv: string[]): number {
    let jobPath: string;
    let mode: string;
    try {
        const parsed = parseArgs({
            args: argv,
            options: { mode: { type: 'string', default: 'pass' } },
            allowPositionals: true,
        });
        if (parsed.positionals.length !== 1) {
            throw new ShimError('BadInvocation', 'usage: main.js [--mode pass|fill] <job.json>');
        }
        jobPath = parsed.positionals[0];
        mode = parsed.values.mode as string;
    } catch (err) {
        const message = err instanceof ShimError ? err.message : String(err);
        process.stderr.write(JSON.stringify({ code: 'BadInvocation', message }) + '\n');
        return 1;
    }
    try {
        runJob(jobPath, mode);
    } catch (err) {
        if (err instanceof ShimError) {
            process.stderr.write(JSON.stringify({ code: err.code, message: err.message }) + '\n');
        } else {
            process.stderr.write(JSON.stringify({ code: 'InternalError', message: String(err) }) + '\n');
        }
        return 1;
    }
    return 0;
}

if (require.main === module) {
    process.exit(run(process.argv.slice(2)));
}
