"""Structured row/column labels and their s-expression text form.

A label is either an int or a (possibly nested) tuple of labels.  Plain
tuples keep construction provenance queryable: an interlaced row is
``(block, inner)``, an interlaced column is a tuple of original column
labels, and so on through every stage of the reduction.

The total order below is stable across runs and across label kinds
(all ints before all tuples, tuples compared element-wise).
"""

from __future__ import annotations

from typing import Iterator, Tuple, Union

Label = Union[int, Tuple["Label", ...]]


def label_key(label: Label):
    """Sort key realizing a total order over all labels."""
    if isinstance(label, bool):  # bool is an int subtype; forbid quietly
        raise TypeError("bool is not a valid label")
    if isinstance(label, int):
        return (0, label)
    if isinstance(label, tuple):
        return (1, tuple(label_key(x) for x in label))
    raise TypeError(f"not a label: {label!r}")


def is_label(value) -> bool:
    try:
        label_key(value)
    except TypeError:
        return False
    return True


def label_to_sexpr(label: Label) -> str:
    """Serialize a label as a nested s-expression, e.g. ``(1 (2 3))``."""
    if isinstance(label, int):
        return str(label)
    return "(" + " ".join(label_to_sexpr(x) for x in label) + ")"


def _tokenize(text: str) -> Iterator[str]:
    token = []
    for ch in text:
        if ch in "()":
            if token:
                yield "".join(token)
                token.clear()
            yield ch
        elif ch.isspace():
            if token:
                yield "".join(token)
                token.clear()
        else:
            token.append(ch)
    if token:
        yield "".join(token)


def parse_labels(text: str) -> tuple[Label, ...]:
    """Parse a whitespace-separated sequence of s-expression labels."""
    stack: list[list[Label]] = [[]]
    for tok in _tokenize(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise ValueError("unbalanced ')' in label text")
            done = tuple(stack.pop())
            stack[-1].append(done)
        else:
            try:
                stack[-1].append(int(tok))
            except ValueError as exc:
                raise ValueError(f"bad label atom {tok!r}") from exc
    if len(stack) != 1:
        raise ValueError("unbalanced '(' in label text")
    return tuple(stack[0])


def parse_label(text: str) -> Label:
    labels = parse_labels(text)
    if len(labels) != 1:
        raise ValueError(f"expected exactly one label in {text!r}")
    return labels[0]
