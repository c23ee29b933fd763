"""Plain-text weight files (format tag NNETv1).

Layout:
    line 1: NNETv1
    line 2: architecture descriptor, e.g.
            dense:4:50:relu6,dense:50:50:relu6,lstm:50:16,head:16:1:tanh
    then one line per parameter block: "<name> <count> <values...>",
    values printed with 17 significant digits so the round trip is exact.
"""

import numpy as np

from ..errors import WeightFormatError
from .network import ACTIVATIONS, DenseLayer, LstmCell, Network


def save_weights(network, path):
    with open(path, "w") as f:
        f.write("NNETv1\n")
        f.write(network.arch_descriptor() + "\n")
        for name, arr in network.parameters():
            flat = arr.reshape(-1)
            f.write(f"{name} {flat.size} ")
            f.write(" ".join(format(v, ".17g") for v in flat))
            f.write("\n")


def _parse_descriptor(desc):
    """Descriptor -> list of (kind, fields) with all sizes validated later
    by the Network constructor."""
    items = []
    for token in desc.split(","):
        parts = token.strip().split(":")
        if parts[0] in ("dense", "head"):
            if len(parts) != 4:
                raise WeightFormatError(f"bad layer token {token!r}")
            _, i, o, act = parts
            if act not in ACTIVATIONS:
                raise WeightFormatError(f"unknown activation in token {token!r}")
            items.append((parts[0], int(i), int(o), act))
        elif parts[0] == "lstm":
            if len(parts) != 3:
                raise WeightFormatError(f"bad lstm token {token!r}")
            items.append(("lstm", int(parts[1]), int(parts[2])))
        else:
            raise WeightFormatError(f"unknown layer kind in token {token!r}")
    return items


def load_weights(path, expected_arch=None):
    """Load a network; optionally check it against an expected descriptor.

    Raises WeightFormatError naming the offending field on any mismatch.
    """
    with open(path) as f:
        lines = f.read().splitlines()
    if not lines or lines[0].strip() != "NNETv1":
        raise WeightFormatError("missing NNETv1 format tag on line 1")
    if len(lines) < 2:
        raise WeightFormatError("missing architecture descriptor on line 2")
    desc = lines[1].strip()
    if expected_arch is not None and desc != expected_arch:
        raise WeightFormatError(
            f"architecture mismatch: file declares {desc!r}, expected {expected_arch!r}"
        )
    items = _parse_descriptor(desc)

    blocks = {}
    for ln, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        fields = line.split()
        name, count = fields[0], fields[1]
        try:
            count = int(count)
        except ValueError:
            raise WeightFormatError(f"line {ln}: bad element count for block {name}") from None
        values = fields[2:]
        if len(values) != count:
            raise WeightFormatError(
                f"block {name}: declares {count} values, found {len(values)} (truncated file?)"
            )
        if name in blocks:
            raise WeightFormatError(f"duplicate block {name}")
        blocks[name] = np.array([float(v) for v in values])

    def take(name, shape):
        if name not in blocks:
            raise WeightFormatError(f"missing block {name}")
        arr = blocks.pop(name)
        if arr.size != int(np.prod(shape)):
            raise WeightFormatError(
                f"block {name}: {arr.size} values do not fill shape {shape}"
            )
        return arr.reshape(shape)

    layers, heads, lstm = [], [], None
    body_i = head_i = 0
    for item in items:
        if item[0] == "dense":
            _, i, o, act = item
            layers.append(DenseLayer(take(f"layer{body_i}.W", (o, i)),
                                     take(f"layer{body_i}.b", (o,)), act))
            body_i += 1
        elif item[0] == "lstm":
            _, i, h = item
            if lstm is not None:
                raise WeightFormatError("more than one lstm block declared")
            lstm = LstmCell(take("lstm.wx", (4 * h, i)),
                            take("lstm.wh", (4 * h, h)),
                            take("lstm.b", (4 * h,)))
        else:
            _, i, o, act = item
            heads.append(DenseLayer(take(f"head{head_i}.W", (o, i)),
                                    take(f"head{head_i}.b", (o,)), act))
            head_i += 1
    if blocks:
        raise WeightFormatError(f"unexpected extra blocks: {sorted(blocks)}")
    return Network(layers=layers, lstm=lstm, heads=heads)
