"""Command-line entry points for the whole pipeline.

Training and evaluation run locally against trajectory files; the
`sessions` subcommands are thin HTTP clients of a running capture service.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import RunConfig
from .errors import GazecastError


def build_parser():
    parser = argparse.ArgumentParser(prog="gazecast")
    sub = parser.add_subparsers(dest="command", required=True)

    corpus = sub.add_parser("synth-corpus", help="generate a toy trajectory corpus")
    corpus.add_argument("--out", required=True)
    corpus.add_argument("--pedestrians", type=int, default=6)
    corpus.add_argument("--frames", type=int, default=59)
    corpus.add_argument("--seed", type=int, default=0)

    att = sub.add_parser("train-attention", help="train the attention network")
    _common_data_args(att)
    att.add_argument("--gaze", choices=["synthetic", "sessions"], default="synthetic")
    att.add_argument("--sessions-dir")
    att.add_argument("--epochs", type=int)
    att.add_argument("--lr", type=float)
    att.add_argument("--beta", type=float)
    att.add_argument("--batch-size", type=int)
    att.add_argument("--out", help="checkpoint path")

    pred = sub.add_parser("train-predictor", help="train one ablation arm's predictor")
    _common_data_args(pred)
    pred.add_argument("--arm", choices=["GCN", "AGCN", "VGCN", "AVGCN"], default="AVGCN")
    pred.add_argument("--attention-ckpt")
    pred.add_argument("--epochs", type=int)
    pred.add_argument("--lr", type=float)
    pred.add_argument("--alpha", type=float)
    pred.add_argument("--batch-size", type=int)
    pred.add_argument("--field-angle", type=float)
    pred.add_argument("--out", help="checkpoint path")

    ev = sub.add_parser("eval", help="evaluate a trained predictor (best-of-k)")
    _common_data_args(ev)
    ev.add_argument("--arm", choices=["GCN", "AGCN", "VGCN", "AVGCN"], default="AVGCN")
    ev.add_argument("--predictor-ckpt", required=True)
    ev.add_argument("--attention-ckpt")
    ev.add_argument("--k", type=int)
    ev.add_argument("--field-angle", type=float)

    pr = sub.add_parser("predict", help="dump trajectories for external plotting")
    _common_data_args(pr)
    pr.add_argument("--arm", choices=["GCN", "AGCN", "VGCN", "AVGCN"], default="AVGCN")
    pr.add_argument("--predictor-ckpt", required=True)
    pr.add_argument("--attention-ckpt")
    pr.add_argument("--k", type=int)
    pr.add_argument("--limit", type=int, default=10)

    serve = sub.add_parser("serve", help="run the capture service")
    serve.add_argument("--data", required=True)
    serve.add_argument("--sessions-dir")
    serve.add_argument("--frontend-dir")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--frame-stride", type=int)
    serve.add_argument("--config")

    sess = sub.add_parser("sessions", help="talk to a running capture service")
    sess_sub = sess.add_subparsers(dest="session_command", required=True)
    up = sess_sub.add_parser("upload")
    up.add_argument("file")
    up.add_argument("--url", default="http://127.0.0.1:8000")
    up.add_argument("--session-id")
    ls = sess_sub.add_parser("list")
    ls.add_argument("--url", default="http://127.0.0.1:8000")
    get = sess_sub.add_parser("get")
    get.add_argument("session_id")
    get.add_argument("--url", default="http://127.0.0.1:8000")
    get.add_argument("--out")

    return parser


def _common_data_args(cmd):
    cmd.add_argument("--data", required=True, help="directory of *.txt trajectory files")
    cmd.add_argument("--held-out", required=True)
    cmd.add_argument("--seed", type=int)
    cmd.add_argument("--frame-stride", type=int)
    cmd.add_argument("--validation-fraction", type=float)
    cmd.add_argument("--out-dir")
    cmd.add_argument("--config", help="JSON RunConfig to start from; flags override")


def _config_from_args(args, command):
    base = RunConfig.from_file(args.config) if getattr(args, "config", None) else RunConfig()
    overrides = {"command": command}
    mapping = {
        "data": "data_dir",
        "held_out": "held_out",
        "seed": "seed",
        "frame_stride": "frame_stride",
        "validation_fraction": "validation_fraction",
        "out_dir": "out_dir",
        "gaze": "gaze_source",
        "sessions_dir": "sessions_dir",
        "epochs": None,  # handled per command below
        "arm": "arm",
        "attention_ckpt": "attention_checkpoint",
        "predictor_ckpt": "predictor_checkpoint",
        "k": "k",
        "field_angle": "field_angle",
        "host": "host",
        "port": "port",
    }
    for arg_name, cfg_name in mapping.items():
        if cfg_name is None:
            continue
        value = getattr(args, arg_name, None)
        if value is not None:
            overrides[cfg_name] = value

    if command == "train-attention":
        for arg_name, cfg_name in (
            ("epochs", "attention_epochs"),
            ("lr", "attention_lr"),
            ("beta", "beta"),
            ("batch_size", "attention_batch_size"),
            ("out", "attention_checkpoint"),
        ):
            value = getattr(args, arg_name, None)
            if value is not None:
                overrides[cfg_name] = value
    elif command == "train-predictor":
        for arg_name, cfg_name in (
            ("epochs", "predictor_epochs"),
            ("lr", "predictor_lr"),
            ("alpha", "alpha"),
            ("batch_size", "batch_size"),
            ("out", "predictor_checkpoint"),
        ):
            value = getattr(args, arg_name, None)
            if value is not None:
                overrides[cfg_name] = value

    merged = base.model_dump()
    merged.update(overrides)
    return RunConfig.from_dict(merged)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except GazecastError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def _dispatch(args):
    from . import pipeline

    if args.command == "synth-corpus":
        from .synthetic import generate_toy_corpus

        paths = generate_toy_corpus(
            args.out, n_pedestrians=args.pedestrians, n_frames=args.frames, seed=args.seed
        )
        for name, path in paths.items():
            print(f"{name}: {path}")
        return 0

    if args.command == "train-attention":
        config = _config_from_args(args, "train-attention")
        path = pipeline.cmd_train_attention(config)
        print(f"attention checkpoint: {path}")
        return 0

    if args.command == "train-predictor":
        config = _config_from_args(args, "train-predictor")
        path = pipeline.cmd_train_predictor(config)
        print(f"predictor checkpoint: {path}")
        return 0

    if args.command == "eval":
        config = _config_from_args(args, "eval")
        path, report = pipeline.cmd_eval(config)
        print(report.to_table())
        print(f"report: {path}")
        return 0

    if args.command == "predict":
        config = _config_from_args(args, "predict")
        written = pipeline.cmd_predict(config, limit=args.limit)
        for path in written:
            print(path)
        return 0

    if args.command == "serve":
        import uvicorn

        config = _config_from_args(args, "serve")
        app = pipeline.build_service(config, frontend_dir=args.frontend_dir)
        uvicorn.run(app, host=config.host, port=config.port)
        return 0

    if args.command == "sessions":
        return _sessions_client(args)

    raise AssertionError(f"unhandled command {args.command}")


def _sessions_client(args):
    import httpx

    base = args.url.rstrip("/")
    if args.session_command == "upload":
        raw = Path(args.file).read_bytes()
        params = {"session_id": args.session_id} if args.session_id else None
        response = httpx.post(f"{base}/sessions", content=raw, params=params)
        print(json.dumps(response.json(), indent=1))
        return 0 if response.status_code == 201 else 1
    if args.session_command == "list":
        response = httpx.get(f"{base}/sessions")
        print(json.dumps(response.json(), indent=1))
        return 0 if response.status_code == 200 else 1
    if args.session_command == "get":
        response = httpx.get(f"{base}/sessions/{args.session_id}")
        if response.status_code != 200:
            print(json.dumps(response.json(), indent=1))
            return 1
        if args.out:
            Path(args.out).write_bytes(response.content)
            print(args.out)
        else:
            sys.stdout.write(response.text)
        return 0
    raise AssertionError


if __name__ == "__main__":
    sys.exit(main())
