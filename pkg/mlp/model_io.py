"""
Plain-text model serialization.

Format (one record per line, fields separated by single spaces, LF endings):

    layerwise-mlp 1
    input_dim <d>
    hidden_widths <w1> ... <wL>
    hidden_activation <relu|identity|tanh>
    output_activation <relu|identity|tanh>
    layer <k> <rows> <cols>          repeated for k = 1..L, followed by
    w <v> ... <v>                    <rows> weight rows
    b <v> ... <v>                    the bias vector
    head <width>
    w <v> ... <v>
    b <v>
    end

Only blank lines may follow `end`. Floats use 17 significant digits, which round-trips every finite double.
"""

from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
from loguru import logger

from core.errors import ModelParseError
from core.text_io import read_text
from mlp.network import ActivationKind, LayerParams, Mlp, OutputHead

MAGIC = "layerwise-mlp 1"


def _floats(values) -> str:
    return " ".join(f"{float(v):.17g}" for v in values)


def dump_model(net: Mlp) -> str:
    """Serialize `net` to the text format above."""
    arch = net.architecture
    lines = [
        MAGIC,
        f"input_dim {arch.input_dim}",
        "hidden_widths " + " ".join(str(w) for w in arch.hidden_widths),
        f"hidden_activation {arch.hidden_activation.value}",
        f"output_activation {arch.output_activation.value}",
    ]
    for k, layer in enumerate(net.layers, start=1):
        lines.append(f"layer {k} {layer.out_dim} {layer.in_dim}")
        lines.extend(f"w {_floats(row)}" for row in layer.weights)
        lines.append(f"b {_floats(layer.bias)}")
    lines.append(f"head {net.head.in_dim}")
    lines.append(f"w {_floats(net.head.weights)}")
    lines.append(f"b {_floats([net.head.bias])}")
    lines.append("end")
    return "\n".join(lines) + "\n"


class _LineReader:
    """Hands out tokenized lines and remembers where it is for error messages."""

    def __init__(self, text: str):
        self._lines = text.split("\n")
        self.line = 0

    def next(self, keyword: str) -> List[str]:
        while self.line < len(self._lines):
            self.line += 1
            tokens = self._lines[self.line - 1].split()
            if tokens:
                if tokens[0] != keyword:
                    raise ModelParseError(f"expected '{keyword}', got '{tokens[0]}'", self.line)
                return tokens[1:]
        raise ModelParseError(f"unexpected end of file, expected '{keyword}'", self.line)

    def expect_eof(self) -> None:
        for number in range(self.line + 1, len(self._lines) + 1):
            if self._lines[number - 1].strip():
                raise ModelParseError("unexpected content after 'end'", number)

    def ints(self, keyword: str, count: int) -> Tuple[int, ...]:
        tokens = self.next(keyword)
        if count >= 0 and len(tokens) != count:
            raise ModelParseError(f"'{keyword}' takes {count} integers, got {len(tokens)}", self.line)
        try:
            return tuple(int(t) for t in tokens)
        except ValueError as e:
            raise ModelParseError(f"bad integer in '{keyword}': {e}", self.line) from e

    def floats(self, keyword: str, count: int) -> np.ndarray:
        tokens = self.next(keyword)
        if len(tokens) != count:
            raise ModelParseError(f"'{keyword}' row needs {count} values, got {len(tokens)}", self.line)
        try:
            values = np.array([float(t) for t in tokens], dtype=np.float64)
        except ValueError as e:
            raise ModelParseError(f"bad number: {e}", self.line) from e
        if not np.all(np.isfinite(values)):
            raise ModelParseError("non-finite parameter", self.line)
        return values

    def activation(self, keyword: str) -> ActivationKind:
        tokens = self.next(keyword)
        if len(tokens) != 1:
            raise ModelParseError(f"'{keyword}' takes one name, got {tokens}", self.line)
        try:
            return ActivationKind(tokens[0])
        except ValueError as e:
            raise ModelParseError(f"unknown activation {tokens}", self.line) from e


def parse_model(text: str) -> Mlp:
    """
    Parse the text format back into an Mlp.

    Raises:
        ModelParseError: On any deviation from the grammar, with its line number
    """
    reader = _LineReader(text)
    if reader.next("layerwise-mlp") != ["1"]:
        raise ModelParseError("unsupported format version", reader.line)
    (input_dim,) = reader.ints("input_dim", 1)
    widths = reader.ints("hidden_widths", -1)
    if not widths:
        raise ModelParseError("at least one hidden width is required", reader.line)
    hidden_activation = reader.activation("hidden_activation")
    output_activation = reader.activation("output_activation")

    layers = []
    in_dim = input_dim
    for k, width in enumerate(widths, start=1):
        header = reader.ints("layer", 3)
        if header != (k, width, in_dim):
            raise ModelParseError(f"expected 'layer {k} {width} {in_dim}', got {header}", reader.line)
        weights = np.array([reader.floats("w", in_dim) for _ in range(width)])
        bias = reader.floats("b", width)
        layers.append(LayerParams(weights, bias))
        in_dim = width

    if reader.ints("head", 1) != (in_dim,):
        raise ModelParseError(f"head width must be {in_dim}", reader.line)
    head_weights = reader.floats("w", in_dim)
    head_bias = reader.floats("b", 1)[0]
    reader.next("end")
    reader.expect_eof()
    return Mlp(tuple(layers), OutputHead(head_weights, head_bias, output_activation), hidden_activation)


def save_model(net: Mlp, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as file:
        file.write(dump_model(net))
    logger.debug(f"Model saved: {path}")
    return path


def load_model(path: Union[str, Path]) -> Mlp:
    return parse_model(read_text(path, ModelParseError))
