"""Workbench command line.

Subcommands: serve, train-text, train-meme, explain (batch), ueq, cuq,
wilcoxon, stub-registry. All structured output is JSON on stdout;
diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path


def _print(payload) -> None:
    json.dump(payload, sys.stdout, indent=2, ensure_ascii=False)
    sys.stdout.write("\n")


def _report_load(result, label: str) -> None:
    if result.errors:
        for err in result.errors:
            print(f"{label}: line {err.line}: {err.message}", file=sys.stderr)
        print(f"{label}: {len(result.errors)} record(s) rejected", file=sys.stderr)


def cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app, load_server_config
    from .api.registry import CONFIG_ENV

    config_path = args.config or os.environ.get(CONFIG_ENV) or "config.json"
    config = load_server_config(config_path)
    app = create_app(config)
    uvicorn.run(app, host=args.host, port=config.port)
    return 0


def cmd_train_text(args) -> int:
    from .corpus import load_text_dataset
    from .textclf import TextModelConfig, train_text_classifier

    train = load_text_dataset(args.train)
    val = load_text_dataset(args.val) if args.val else train
    _report_load(train, "train")
    if args.val:
        _report_load(val, "val")
    config = TextModelConfig(
        encoder_id=args.encoder,
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        max_sequence_length=args.max_sequence_length,
        seed=args.seed,
        backbone=args.backbone,
    )
    _, report = train_text_classifier(train.manifest, val.manifest, config, out_dir=args.out)
    _print({"checkpoint": str(args.out), "validation": report.to_dict()})
    return 0


def cmd_train_meme(args) -> int:
    from .corpus import load_meme_dataset
    from .mmclf import MultimodalModelConfig, train_multimodal_classifier

    train = load_meme_dataset(args.train, args.image_root)
    val = load_meme_dataset(args.val, args.val_image_root or args.image_root) if args.val else train
    _report_load(train, "train")
    if args.val:
        _report_load(val, "val")
    config = MultimodalModelConfig(
        image_encoder_id=args.image_encoder,
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        image_size=args.image_size,
        seed=args.seed,
        backbone=args.backbone,
    )
    _, report = train_multimodal_classifier(train.manifest, val.manifest, config, out_dir=args.out)
    _print({"checkpoint": str(args.out), "validation": report.to_dict()})
    return 0


def _load_any_checkpoint(path: Path):
    from .api.registry import _load_checkpoint

    return _load_checkpoint(path)


def cmd_explain(args) -> int:
    import numpy as np

    from .xai import explain_image, explain_text, render_saliency_overlay

    model = _load_any_checkpoint(Path(args.checkpoint))
    target = args.target

    def text_score(model, image=None):
        def fn(text: str) -> float:
            pred = model.predict(text) if image is None else model.predict(image, text)
            return pred.binary_confidence if target == "binary_positive" else pred.sublabel_scores[target]

        return fn

    if args.text is not None:
        requests = [{"text": args.text}]
    else:
        with open(args.input, encoding="utf-8") as fh:
            requests = [json.loads(line) for line in fh if line.strip()]

    outputs = []
    for i, request in enumerate(requests):
        if model.modality == "text":
            report = explain_text(
                text_score(model),
                request["text"],
                method=args.method,
                target=target,
                n_perturbations=args.n_perturbations,
                seed=args.seed,
            )
            outputs.append({"attribution_report": report.to_dict()})
        else:
            image = Path(request["image"]).read_bytes()
            text = request.get("text", "")

            def image_score(pixels: np.ndarray, txt: str) -> float:
                import io

                from PIL import Image

                buf = io.BytesIO()
                Image.fromarray(pixels).save(buf, format="PNG")
                pred = model.predict(buf.getvalue(), txt)
                return (
                    pred.binary_confidence
                    if target == "binary_positive"
                    else pred.sublabel_scores[target]
                )

            saliency = explain_image(
                image_score,
                image,
                text,
                method=args.method,
                target=target,
                n_perturbations=args.n_perturbations,
                seed=args.seed,
                n_regions=args.n_regions,
            )
            entry = {"saliency_map": saliency.to_dict()}
            if args.artifacts:
                Path(args.artifacts).mkdir(parents=True, exist_ok=True)
                out_png = Path(args.artifacts) / f"explain_{i:04d}.png"
                out_png.write_bytes(render_saliency_overlay(saliency, image))
                entry["artifact"] = str(out_png)
            if text.strip():
                report = explain_text(
                    text_score(model, image=image),
                    text,
                    method=args.method,
                    target=target,
                    n_perturbations=args.n_perturbations,
                    seed=args.seed,
                )
                entry["attribution_report"] = report.to_dict()
            outputs.append(entry)

    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            for entry in outputs:
                fh.write(json.dumps(entry, ensure_ascii=False) + "\n")
    else:
        _print(outputs)
    return 0


def cmd_ueq(args) -> int:
    from .evalkit import read_ueq_csv, score_ueq

    report = score_ueq(read_ueq_csv(args.input))
    _print(
        {
            "dimensions": {name: asdict(stats) for name, stats in report.dimensions.items()},
            "overall": report.overall,
        }
    )
    return 0


def cmd_cuq(args) -> int:
    from .evalkit import read_cuq_csv, score_cuq

    responses = read_cuq_csv(args.input)
    scores = {r.participant_id: score_cuq(r) for r in responses}
    values = list(scores.values())
    _print(
        {
            "scores": scores,
            "mean": sum(values) / len(values) if values else None,
            "min": min(values) if values else None,
            "max": max(values) if values else None,
        }
    )
    return 0


def _parse_series(raw: str) -> list[float]:
    return [float(v) for v in raw.replace(",", " ").split()]


def cmd_wilcoxon(args) -> int:
    from .evalkit import format_p, wilcoxon_exact

    if args.csv:
        import csv as csvmod

        with open(args.csv, newline="", encoding="utf-8") as fh:
            rows = list(csvmod.DictReader(fh))
        x = [float(r["x"]) for r in rows]
        y = [float(r["y"]) for r in rows] if rows and "y" in rows[0] else None
    else:
        x = _parse_series(args.x)
        y = _parse_series(args.y) if args.y else None
    result = wilcoxon_exact(x, y, mu=args.mu)
    _print(
        {
            "statistic": result.statistic,
            "p_value": result.p_value,
            "p_display": format_p(result.p_value),
            "n_nonzero": result.n,
        }
    )
    return 0


def cmd_stub_registry(args) -> int:
    from .api.stub import make_stub_registry

    config_path = make_stub_registry(args.out)
    _print({"config": str(config_path)})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="misodetect", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", help="config file (default: $MISODETECT_CONFIG or ./config.json)")
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("train-text", help="train a text classifier")
    p.add_argument("--train", required=True)
    p.add_argument("--val")
    p.add_argument("--out", required=True)
    p.add_argument("--encoder", default="mbert", choices=["mbert", "xlmr"])
    p.add_argument("--backbone", default="scratch", choices=["scratch", "hf"])
    p.add_argument("--learning-rate", type=float, default=2e-5)
    p.add_argument("--epochs", type=int, default=3)
    p.add_argument("--max-sequence-length", type=int, default=128)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train_text)

    p = sub.add_parser("train-meme", help="train a multimodal meme classifier")
    p.add_argument("--train", required=True)
    p.add_argument("--val")
    p.add_argument("--image-root", required=True)
    p.add_argument("--val-image-root")
    p.add_argument("--out", required=True)
    p.add_argument("--image-encoder", default="resnet", choices=["resnet", "efficientnet"])
    p.add_argument("--backbone", default="scratch", choices=["scratch", "hf"])
    p.add_argument("--learning-rate", type=float, default=2e-5)
    p.add_argument("--epochs", type=int, default=3)
    p.add_argument("--image-size", type=int, default=224)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train_meme)

    p = sub.add_parser("explain", help="batch explanations for a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--method", default="kernel_shap", choices=["lime", "kernel_shap"])
    p.add_argument("--target", default="binary_positive")
    p.add_argument("--text", help="single text input (instead of --input)")
    p.add_argument("--input", help="JSONL of {text} or {image, text?} requests")
    p.add_argument("--out", help="write line-delimited reports here instead of stdout")
    p.add_argument("--artifacts", help="directory for rendered heatmap PNGs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-perturbations", type=int, default=1000)
    p.add_argument("--n-regions", type=int, default=8)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("ueq", help="score UEQ responses from CSV")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_ueq)

    p = sub.add_parser("cuq", help="score CUQ responses from CSV")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_cuq)

    p = sub.add_parser("wilcoxon", help="exact signed-rank test")
    p.add_argument("--x", help="comma or space separated values")
    p.add_argument("--y", help="paired values (omit for one-sample against --mu)")
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--csv", help="CSV with columns x[,y]")
    p.set_defaults(func=cmd_wilcoxon)

    p = sub.add_parser("stub-registry", help="write stub checkpoints + config for tests/UI work")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stub_registry)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "explain" and not (args.text or args.input):
        build_parser().error("explain needs --text or --input")
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
