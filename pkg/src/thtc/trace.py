"""Partial valuations, finite traces, and trace pairs ordered by information.

Values are exact rationals, never floats.  A variable that is absent from a
valuation is undefined; undefinedness is modelled by ``None`` and written
``u`` in text output.  Boolean variables hold the single truth constant
``TRUE`` (written ``t``); there is no explicit false.
"""

from __future__ import annotations

import itertools
from fractions import Fraction


class _Truth:
    """The truth constant for Boolean variables; distinct from every rational."""

    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "t"


TRUE = _Truth()

#: Reserved pseudo-variable used to represent standalone constants in linear
#: terms.  It evaluates to 1 at every time point of every trace and cannot be
#: declared or assigned.  The name is not a legal identifier, so it can never
#: collide with a user variable.
ONE = "1"


def parse_value(text):
    """Parse a value literal: ``"t"``, a decimal like ``"11.35"``, or ``"num/den"``."""
    if text == "t":
        return TRUE
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ValueError("not a rational value: %r" % (text,))


def format_value(value):
    """Render a value exactly: decimals when the denominator is 2^a*5^b, else num/den."""
    if value is None:
        return "u"
    if value is TRUE:
        return "t"
    den = value.denominator
    twos = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    fives = 0
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return "%d/%d" % (value.numerator, value.denominator)
    digits = max(twos, fives)
    if digits == 0:
        return str(value.numerator)
    scaled = value.numerator * 10 ** digits // value.denominator
    sign = "-" if scaled < 0 else ""
    text = str(abs(scaled)).rjust(digits + 1, "0")
    return "%s%s.%s" % (sign, text[:-digits], text[-digits:])


class PartialValuation:
    """Immutable finite map from variable names to values.

    Absent names are undefined.  ``ONE`` implicitly maps to 1 and is never
    stored.  Entries mapping to ``None`` are dropped on construction.
    """

    __slots__ = ("_map", "_hash")

    def __init__(self, mapping=None):
        cleaned = {}
        if mapping:
            for name, value in mapping.items():
                if value is None:
                    continue
                if not isinstance(value, (Fraction, _Truth)):
                    value = Fraction(value)
                cleaned[name] = value
        self._map = cleaned
        self._hash = hash(frozenset(cleaned.items()))

    def get(self, name):
        if name == ONE:
            return Fraction(1)
        return self._map.get(name)

    def defined(self):
        """The set of variable names with a defined value."""
        return set(self._map)

    def items(self):
        return self._map.items()

    def without(self, names):
        """Copy of this valuation with the given names made undefined."""
        return PartialValuation(
            {k: v for k, v in self._map.items() if k not in names}
        )

    def __eq__(self, other):
        if not isinstance(other, PartialValuation):
            return NotImplemented
        return self._map == other._map

    def __hash__(self):
        return self._hash

    def __repr__(self):
        inner = ", ".join(
            "%s->%s" % (k, format_value(v)) for k, v in sorted(self._map.items())
        )
        return "{%s}" % inner


class Trace:
    """A finite, nonempty sequence of partial valuations."""

    __slots__ = ("valuations",)

    def __init__(self, valuations):
        vals = tuple(
            v if isinstance(v, PartialValuation) else PartialValuation(v)
            for v in valuations
        )
        if not vals:
            raise ValueError("a trace must contain at least one valuation")
        object.__setattr__(self, "valuations", vals)

    def __setattr__(self, name, value):
        raise AttributeError("Trace is immutable")

    @property
    def length(self):
        return len(self.valuations)

    def value_at(self, i, term):
        """Value of a temporal term at time point i.

        Returns the valuation of the term's variable displaced by its offset,
        or ``None`` when the displaced index falls outside the trace.
        """
        if not 0 <= i < self.length:
            raise IndexError("time point %d outside trace of length %d" % (i, self.length))
        if term.variable == ONE:
            return Fraction(1)
        j = i + term.offset
        if not 0 <= j < self.length:
            return None
        return self.valuations[j].get(term.variable)

    def defined_entries(self):
        """Sorted list of (time, variable) pairs with a defined value."""
        return sorted(
            (i, name)
            for i, val in enumerate(self.valuations)
            for name in val.defined()
        )

    def __eq__(self, other):
        if not isinstance(other, Trace):
            return NotImplemented
        return self.valuations == other.valuations

    def __hash__(self):
        return hash(self.valuations)

    def __repr__(self):
        return " . ".join(repr(v) for v in self.valuations)


def leq(a, b):
    """Information order on traces: every value defined in a is equal in b."""
    if a.length != b.length:
        raise ValueError("traces have different lengths: %d vs %d" % (a.length, b.length))
    for va, vb in zip(a.valuations, b.valuations):
        for name, value in va.items():
            if vb.get(name) != value:
                return False
    return True


def strictly_less(a, b):
    """True when a is below b in the information order and differs from it."""
    return leq(a, b) and a != b


def proper_weakenings(trace):
    """Yield every trace strictly below the given one.

    Weakenings are obtained by undefining nonempty subsets of the defined
    (time, variable) entries, in a deterministic order: by subset size, then
    lexicographically over the sorted entry list.  There are 2^d - 1 of them
    for d defined entries.
    """
    entries = trace.defined_entries()
    for size in range(1, len(entries) + 1):
        for subset in itertools.combinations(entries, size):
            removed = {}
            for i, name in subset:
                removed.setdefault(i, set()).add(name)
            yield Trace(
                [
                    val.without(removed[i]) if i in removed else val
                    for i, val in enumerate(trace.valuations)
                ]
            )


class HTcTrace:
    """A pair of equal-length traces with here below there.

    The ordering requirement is checked on construction and, because traces
    are immutable, holds for the lifetime of the pair.
    """

    __slots__ = ("here", "there")

    def __init__(self, here, there):
        if not isinstance(here, Trace):
            here = Trace(here)
        if not isinstance(there, Trace):
            there = Trace(there)
        if here.length != there.length:
            raise ValueError(
                "here/there lengths differ: %d vs %d" % (here.length, there.length)
            )
        if not leq(here, there):
            raise ValueError("here-trace is not below there-trace")
        object.__setattr__(self, "here", here)
        object.__setattr__(self, "there", there)

    def __setattr__(self, name, value):
        raise AttributeError("HTcTrace is immutable")

    @property
    def length(self):
        return self.here.length

    @property
    def total(self):
        """True when here and there coincide."""
        return self.here == self.there

    def __eq__(self, other):
        if not isinstance(other, HTcTrace):
            return NotImplemented
        return self.here == other.here and self.there == other.there

    def __hash__(self):
        return hash((self.here, self.there))

    def __repr__(self):
        return "<%r, %r>" % (self.here, self.there)


def total_trace(trace):
    """Pair a trace with itself."""
    return HTcTrace(trace, trace)
