"""Command line driver: synth, compress, stream, reconstruct, diff."""

import argparse
import csv
import glob
import logging
import os
import sys
import time

import numpy as np

from . import fileio
from .datagen import SineSpec, noisy_slices
from .memtrack import track_peak
from .sthosvd import check_tau, reconstruct, relative_error, sthosvd
from .streaming import stream_init, stream_update, estimate_relative_error
from .tensor import frobenius_norm

log = logging.getLogger("streamtucker")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_BAD_MAGIC = 4
EXIT_TRUNCATED = 5
EXIT_VERSION = 6
EXIT_BAD_VALUE = 7
EXIT_TOO_FEW_SLICES = 8

COMPRESS_FIELDS = ["algorithm", "tau", "ranks", "peak_bytes", "wall_ms", "rel_error"]
STREAM_FIELDS = ["algorithm", "step", "n_d", "tau", "ranks", "peak_bytes", "wall_ms",
                 "slice_norm", "residual_norms", "rel_error_estimate"]

SLICE_PATTERN = "slice_{:06d}.tns"


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _int_list(text):
    try:
        values = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    return values


def _ranks_str(ranks):
    return "x".join(str(r) for r in ranks)


class _MetricsSink:
    """Append rows to a CSV file (header written once) or to stdout for '-'."""

    def __init__(self, path, fields):
        self.path = path
        self.fields = fields
        self.rows = []

    def add(self, **row):
        self.rows.append(row)

    def flush(self):
        if not self.path or not self.rows:
            return
        if self.path == "-":
            writer = csv.DictWriter(sys.stdout, fieldnames=self.fields)
            writer.writeheader()
            writer.writerows(self.rows)
        else:
            new = not os.path.exists(self.path) or os.path.getsize(self.path) == 0
            with open(self.path, "a", newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=self.fields)
                if new:
                    writer.writeheader()
                writer.writerows(self.rows)
        self.rows = []


def _read(path):
    try:
        return fileio.read_tensor(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO)


def _check_tau(tau):
    try:
        check_tau(tau)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_BAD_VALUE)


def cmd_synth(args):
    if args.out is None and args.slices_dir is None:
        raise CliError("synth needs --out and/or --slices-dir", EXIT_USAGE)
    if len(args.dims) != len(args.bandwidths):
        raise CliError("--dims and --bandwidths must have the same length", EXIT_USAGE)
    if not 0.0 <= args.eta < 1.0:
        raise CliError("--eta must lie in [0, 1)", EXIT_BAD_VALUE)
    spec = SineSpec(args.dims, args.bandwidths, seed=args.seed)
    full = np.empty(args.dims, order="F") if args.out else None
    if args.slices_dir:
        os.makedirs(args.slices_dir, exist_ok=True)
    for i, y in enumerate(noisy_slices(spec, args.eta, seed=args.seed)):
        if full is not None:
            full[..., i] = y
        if args.slices_dir:
            fileio.write_tensor(os.path.join(args.slices_dir, SLICE_PATTERN.format(i)), y)
    if full is not None:
        fileio.write_tensor(args.out, full)
    log.info("synthesized %s tensor", "x".join(map(str, args.dims)))


def cmd_compress(args):
    _check_tau(args.tau)
    x = _read(args.input)
    start = time.perf_counter()
    with track_peak(x) as usage:
        model = sthosvd(x, args.tau)
    wall_ms = (time.perf_counter() - start) * 1e3
    err = relative_error(x, model)
    fileio.save_checkpoint(args.out_model, model)
    sink = _MetricsSink(args.metrics_csv, COMPRESS_FIELDS)
    sink.add(algorithm="batch", tau=args.tau, ranks=_ranks_str(model.ranks),
             peak_bytes=usage.peak_bytes, wall_ms=f"{wall_ms:.3f}",
             rel_error=f"{err:.6e}")
    sink.flush()
    log.info("ranks %s, relative error %.3e", model.ranks, err)


def _slice_files(directory):
    files = sorted(glob.glob(os.path.join(directory, "slice_*.tns")))
    if not files:
        raise CliError(f"no slice files in {directory}", EXIT_TOO_FEW_SLICES)
    return files


def _stream_row(state, algorithm, rec=None, peak=0, wall_ms=0.0):
    if rec is None:
        return dict(algorithm=algorithm, step=0, n_d=state.n_d, tau=state.tau,
                    ranks=_ranks_str(state.ranks), peak_bytes=peak,
                    wall_ms=f"{wall_ms:.3f}", slice_norm="",
                    residual_norms="",
                    rel_error_estimate=f"{estimate_relative_error(state):.6e}")
    return dict(algorithm=algorithm, step=rec.step, n_d=rec.n_d, tau=state.tau,
                ranks=_ranks_str(rec.ranks), peak_bytes=rec.peak_bytes,
                wall_ms=f"{rec.wall_ms:.3f}", slice_norm=f"{rec.slice_norm:.6e}",
                residual_norms=";".join(f"{r:.3e}" for r in rec.residual_norms),
                rel_error_estimate=f"{rec.error_estimate:.6e}")


def cmd_stream(args):
    files = _slice_files(args.slices_dir)
    sink = _MetricsSink(args.metrics_csv, STREAM_FIELDS)
    if args.resume:
        _, state = _load_checkpoint(args.resume)
        if state is None:
            raise CliError(f"{args.resume} holds no streaming state", EXIT_BAD_VALUE)
        if state.n_d > len(files):
            raise CliError("checkpoint is ahead of the slice directory",
                           EXIT_TOO_FEW_SLICES)
        next_index = state.n_d
    else:
        _check_tau(args.tau)
        k = args.init_slices
        if k < 1:
            raise CliError("--init-slices must be positive", EXIT_USAGE)
        if len(files) < k:
            raise CliError(f"{len(files)} slices present, {k} needed for init",
                           EXIT_TOO_FEW_SLICES)
        first = [_read(f) for f in files[:k]]
        init = np.stack(first, axis=-1)
        del first
        start = time.perf_counter()
        state = stream_init(init, args.tau, track_memory=args.track_memory)
        wall_ms = (time.perf_counter() - start) * 1e3
        sink.add(**_stream_row(state, "stream_init", peak=state.init_peak_bytes,
                               wall_ms=wall_ms))
        del init
        next_index = k

    for count, path in enumerate(files[next_index:], start=1):
        y = _read(path)
        if y.shape != state.slice_dims:
            raise CliError(f"{path}: slice shape {y.shape}, expected {state.slice_dims}",
                           EXIT_BAD_VALUE)
        stream_update(state, y, track_memory=args.track_memory)
        sink.add(**_stream_row(state, "stream", state.metrics[-1]))
        if args.checkpoint_every and count % args.checkpoint_every == 0:
            fileio.save_checkpoint(args.out_model, state.model, state)
            sink.flush()
    fileio.save_checkpoint(args.out_model, state.model, state)
    sink.flush()
    log.info("streamed %d slices, ranks %s, estimated error %.3e",
             state.n_d, state.ranks, estimate_relative_error(state))


def _load_checkpoint(path):
    try:
        return fileio.load_checkpoint(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO)


def cmd_reconstruct(args):
    model, _ = _load_checkpoint(args.model)
    fileio.write_tensor(args.out, reconstruct(model))


def cmd_diff(args):
    a = _read(args.a)
    b = _read(args.b)
    if a.shape != b.shape:
        raise CliError(f"shapes differ: {a.shape} vs {b.shape}", EXIT_BAD_VALUE)
    norm = frobenius_norm(a)
    err = frobenius_norm(a - b)
    rel = err / norm if norm > 0 else err
    print(f"{rel:.6e}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="streamtucker",
        description="Batch and streaming ST-HOSVD compression of dense tensors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a noisy sine-wave tensor")
    p.add_argument("--dims", type=_int_list, required=True)
    p.add_argument("--bandwidths", type=_int_list, required=True)
    p.add_argument("--eta", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--slices-dir")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("compress", help="batch ST-HOSVD of a tensor file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--out-model", required=True)
    p.add_argument("--metrics-csv")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("stream", help="streaming ST-HOSVD over a slice directory")
    p.add_argument("--init-slices", type=int, default=1)
    p.add_argument("--slices-dir", required=True)
    p.add_argument("--tau", type=float)
    p.add_argument("--out-model", required=True)
    p.add_argument("--metrics-csv")
    p.add_argument("--checkpoint-every", type=int, default=0)
    p.add_argument("--resume", help="continue from a checkpoint file")
    p.add_argument("--track-memory", action="store_true",
                   help="record allocation peaks per slice")
    p.set_defaults(func=cmd_stream)

    p = sub.add_parser("reconstruct", help="expand a model file to a tensor file")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("diff", help="relative Frobenius error of --b against --a")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.set_defaults(func=cmd_diff)
    return parser


def _configure_logging():
    level = os.environ.get("TUCKER_LOG", "error").upper()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level, logging.ERROR),
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None):
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "stream" and args.resume is None and args.tau is None:
        parser.error("stream needs --tau unless resuming")
    try:
        args.func(args)
    except CliError as exc:
        print(f"streamtucker: error: {exc}", file=sys.stderr)
        return exc.code
    except fileio.BadMagicError as exc:
        print(f"streamtucker: error: {exc}", file=sys.stderr)
        return EXIT_BAD_MAGIC
    except fileio.TruncatedPayloadError as exc:
        print(f"streamtucker: error: {exc}", file=sys.stderr)
        return EXIT_TRUNCATED
    except fileio.VersionMismatchError as exc:
        print(f"streamtucker: error: {exc}", file=sys.stderr)
        return EXIT_VERSION
    except OSError as exc:
        print(f"streamtucker: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"streamtucker: error: {exc}", file=sys.stderr)
        return EXIT_BAD_VALUE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
