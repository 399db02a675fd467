"""Concrete text syntax for formulas, programs, and trace documents.

Formula syntax
--------------

::

    formula   := iff
    iff       := implies ("<->" implies)*            (lowest precedence)
    implies   := or ("->" implies)?                  (right associative)
    or        := and ("|" and)*
    and       := temporal ("&" temporal)*
    temporal  := unary (("U"|"R"|"S"|"T") temporal)?  (right associative)
    unary     := ("not"|"X"|"Y"|"wX"|"wY"|"G"|"F"|"H"|"P") unary | primary
    primary   := "true" | "false" | "I" | "Fin" | "(" formula ")" | atom
    atom      := "df" "(" linterm ")"
               | "complement" "(" atom ")"
               | name "(" term ("," term)* ")"        (registered custom atom)
               | term ":=" linterm                    (assignment)
               | linterm cmp linterm                  (cmp: <= < = != >= >)
               | term                                 (Boolean atom)
    linterm   := ["-"] summand (("+"|"-") summand)*
    summand   := number ["*" term] | term
    term      := name ["@" ["-"] integer] | "next" "(" name ")" | "prev" "(" name ")"

Unary operators bind tightest, so their operand must be an atom or
parenthesized.  ``x@k`` reads variable ``x`` displaced ``k`` steps;
``>=``/``>`` swap their operands into ``<=``/``<`` form.  ``%`` starts a
comment running to the end of the line.

Program syntax
--------------

Declarations precede rules.  ``#rational x.`` and ``#boolean p.`` declare
variables; ``#rational x in {0, 1, 2}.`` attaches a finite candidate set.
A rule is ``head.`` or ``head :- literal, ..., literal.`` where the head is
an assignment ``x@k := linterm`` or a bare Boolean term, and a literal is a
comparison, Boolean, or custom atom, optionally prefixed by ``not`` (with
optional parentheses).  Prefixing a rule with ``always:`` enforces it at
every time point; bare rules hold at time 0 only.

Trace documents
---------------

A trace file is a JSON object ``{"length": n, "here": [...], "there": [...]}``
whose state lists map variable names to value strings: decimals like
``"11.35"`` (parsed exactly), ``"num/den"`` fractions, or ``"t"`` for the
Boolean truth constant.  A missing key means undefined.  The here-states must
be below the there-states in the information ordering.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction

from . import constraints, syntax
from .syntax import (
    Always,
    AlwaysPast,
    And,
    Assign,
    Atom,
    BoolIsTrue,
    Bottom,
    Complement,
    CustomAtom,
    Df,
    Eq,
    Eventually,
    EventuallyPast,
    Final,
    Iff,
    Implies,
    Initial,
    LinearLeq,
    LinearTerm,
    Lt,
    Neq,
    Next,
    Not,
    Or,
    Previous,
    Program,
    Release,
    Rule,
    SCOPE_ALWAYS,
    SCOPE_INITIAL,
    Since,
    Top,
    TemporalTerm,
    Trigger,
    Until,
    VarDecl,
    WeakNext,
    WeakPrev,
    lt_single,
)
from .trace import ONE, TRUE, HTcTrace, Trace, format_value, parse_value


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    start: int
    end: int

    def __str__(self):
        return "line %d, column %d" % (self.line, self.column)


class ParseError(Exception):
    """A diagnostic with a source span inside the offending input."""

    def __init__(self, message, span):
        super().__init__("%s (%s)" % (message, span))
        self.message = message
        self.span = span


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<directive>\#[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><->|->|:-|:=|<=|>=|!=|[<>=&|(){},.@+\-*:])
    """,
    re.VERBOSE,
)

_UNARY_OPS = {
    "not": Not,
    "X": Next,
    "Y": Previous,
    "wX": WeakNext,
    "wY": WeakPrev,
    "G": Always,
    "F": Eventually,
    "H": AlwaysPast,
    "P": EventuallyPast,
}

_BINARY_TEMPORAL = {"U": Until, "R": Release, "S": Since, "T": Trigger}

RESERVED = (
    set(_UNARY_OPS)
    | set(_BINARY_TEMPORAL)
    | {"I", "Fin", "true", "false", "next", "prev", "df", "complement", "always", "in"}
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    span: SourceSpan


def _tokenize(text):
    tokens = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            span = SourceSpan(line, pos - line_start + 1, pos, pos + 1)
            raise ParseError("unexpected character %r" % text[pos], span)
        kind = match.lastgroup
        token_text = match.group()
        if kind not in ("ws", "comment"):
            span = SourceSpan(line, match.start() - line_start + 1, match.start(), match.end())
            tokens.append(_Token(kind, token_text, span))
        newlines = token_text.count("\n")
        if newlines:
            line += newlines
            line_start = match.start() + token_text.rindex("\n") + 1
        pos = match.end()
    tokens.append(_Token("eof", "", SourceSpan(line, len(text) - line_start + 1, len(text), len(text))))
    return tokens


class _Parser:
    def __init__(self, text, registry=None, declarations=None):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.registry = constraints.REGISTRY if registry is None else registry
        # Declared sorts, populated in program mode; None = free formula mode.
        self.declarations = declarations

    # Token plumbing.

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def at(self, kind, text=None):
        token = self.peek()
        return token.kind == kind and (text is None or token.text == text)

    def accept(self, kind, text=None):
        if self.at(kind, text):
            return self.next()
        return None

    def expect(self, kind, text=None):
        token = self.accept(kind, text)
        if token is None:
            got = self.peek()
            want = text if text is not None else kind
            raise ParseError("expected %r, found %r" % (want, got.text or "end of input"), got.span)
        return token

    def fail(self, message, token=None):
        token = token or self.peek()
        raise ParseError(message, token.span)

    # Formulas.

    def formula(self):
        out = self.implies()
        while self.accept("op", "<->"):
            out = Iff(out, self.implies())
        return out

    def implies(self):
        lhs = self.disjunction()
        if self.accept("op", "->"):
            return Implies(lhs, self.implies())
        return lhs

    def disjunction(self):
        out = self.conjunction()
        while self.accept("op", "|"):
            out = Or(out, self.conjunction())
        return out

    def conjunction(self):
        out = self.temporal()
        while self.accept("op", "&"):
            out = And(out, self.temporal())
        return out

    def temporal(self):
        lhs = self.unary()
        token = self.peek()
        if token.kind == "ident" and token.text in _BINARY_TEMPORAL:
            self.next()
            return _BINARY_TEMPORAL[token.text](lhs, self.temporal())
        return lhs

    def unary(self):
        token = self.peek()
        if token.kind == "ident" and token.text in _UNARY_OPS:
            self.next()
            return _UNARY_OPS[token.text](self.unary())
        return self.primary()

    def primary(self):
        token = self.peek()
        if token.kind == "ident":
            if token.text == "true":
                self.next()
                return Top()
            if token.text == "false":
                self.next()
                return Bottom()
            if token.text == "I":
                self.next()
                return Initial()
            if token.text == "Fin":
                self.next()
                return Final()
        if self.accept("op", "("):
            inner = self.formula()
            self.expect("op", ")")
            return inner
        return self.atom()

    def atom(self):
        token = self.peek()
        if token.kind == "ident" and token.text == "df":
            self.next()
            self.expect("op", "(")
            term = self.linear_term()
            self.expect("op", ")")
            return Df(term)
        if token.kind == "ident" and token.text == "complement":
            self.next()
            self.expect("op", "(")
            inner = self.atomic_constraint()
            self.expect("op", ")")
            if not constraints.atom_is_strict(inner):
                self.fail("complement needs a strict atom", token)
            return Atom(Complement(inner))
        if (
            token.kind == "ident"
            and token.text not in RESERVED
            and token.text in self.registry
            and self.tokens[self.pos + 1].text == "("
        ):
            return Atom(self.custom_atom())
        return self.comparison()

    def atomic_constraint(self):
        """An atom proper: a <= comparison, a Boolean term, or a custom atom."""
        token = self.peek()
        if token.kind == "ident" and token.text == "complement":
            node = self.atom()
            return node.atom
        if (
            token.kind == "ident"
            and token.text not in RESERVED
            and token.text in self.registry
            and self.tokens[self.pos + 1].text == "("
        ):
            return self.custom_atom()
        node = self.comparison()
        if isinstance(node, Atom):
            return node.atom
        self.fail("expected an atomic constraint (<=, Boolean, or custom atom)", token)

    def custom_atom(self):
        name_token = self.next()
        relation = self.registry[name_token.text]
        self.expect("op", "(")
        args = [self.temporal_term()]
        while self.accept("op", ","):
            args.append(self.temporal_term())
        self.expect("op", ")")
        if len(args) != relation.arity:
            self.fail(
                "%s expects %d arguments, got %d"
                % (name_token.text, relation.arity, len(args)),
                name_token,
            )
        return CustomAtom(name_token.text, tuple(args), relation)

    def comparison(self):
        start = self.peek()
        lhs = self.linear_term()
        if self.accept("op", ":="):
            target = syntax.lt_is_single_var(lhs)
            if target is None:
                self.fail("assignment target must be a single variable term", start)
            self._check_sort(target.variable, syntax.SORT_RATIONAL, start)
            value = self.linear_term()
            self._check_rational_terms(value, start)
            return Assign(target, value)
        for text, build in (
            ("<=", lambda a, b: Atom(LinearLeq(a, b))),
            (">=", lambda a, b: Atom(LinearLeq(b, a))),
            ("!=", Neq),
            ("<", Lt),
            (">", lambda a, b: Lt(b, a)),
            ("=", Eq),
        ):
            if self.accept("op", text):
                rhs = self.linear_term()
                self._check_rational_terms(lhs, start)
                self._check_rational_terms(rhs, start)
                return build(lhs, rhs)
        # No comparison operator: a bare single-variable term is a Boolean atom.
        term = syntax.lt_is_single_var(lhs)
        if term is None:
            self.fail("expected a comparison operator", start)
        self._check_sort(term.variable, syntax.SORT_BOOLEAN, start)
        return Atom(BoolIsTrue(term))

    def _check_sort(self, name, sort, token):
        if self.declarations is None:
            return
        decl = self.declarations.get(name)
        if decl is None:
            self.fail("undeclared variable: %s" % name, token)
        if decl.sort != sort:
            self.fail("variable %s is %s, used as %s" % (name, decl.sort, sort), token)

    def _check_rational_terms(self, linterm, token):
        for _, term in linterm.summands:
            if term.variable != ONE:
                self._check_sort(term.variable, syntax.SORT_RATIONAL, token)

    # Linear and temporal terms.

    def linear_term(self):
        summands = []
        negate = bool(self.accept("op", "-"))
        summands.append(self.summand(negate))
        while True:
            if self.accept("op", "+"):
                summands.append(self.summand(False))
            elif self.accept("op", "-"):
                summands.append(self.summand(True))
            else:
                break
        return LinearTerm(tuple(summands))

    def summand(self, negate):
        token = self.peek()
        if token.kind == "number":
            self.next()
            coeff = Fraction(token.text)
            if negate:
                coeff = -coeff
            if self.accept("op", "*"):
                return (coeff, self.temporal_term())
            return (coeff, syntax.one_term())
        term = self.temporal_term()
        return (Fraction(-1) if negate else Fraction(1), term)

    def temporal_term(self):
        token = self.peek()
        if token.kind != "ident":
            self.fail("expected a variable")
        if token.text in ("next", "prev"):
            self.next()
            self.expect("op", "(")
            name_token = self.expect("ident")
            self._check_variable_name(name_token)
            self.expect("op", ")")
            offset = 1 if token.text == "next" else -1
            return TemporalTerm(name_token.text, offset)
        if token.text in RESERVED:
            self.fail("reserved word %r cannot be a variable" % token.text)
        self.next()
        offset = 0
        if self.accept("op", "@"):
            sign = -1 if self.accept("op", "-") else 1
            number = self.expect("number")
            if "." in number.text:
                raise ParseError("offsets must be integers", number.span)
            offset = sign * int(number.text)
        if self.declarations is not None and token.text not in self.declarations:
            self.fail("undeclared variable: %s" % token.text, token)
        return TemporalTerm(token.text, offset)

    def _check_variable_name(self, token):
        if token.text in RESERVED:
            self.fail("reserved word %r cannot be a variable" % token.text, token)
        if self.declarations is not None and token.text not in self.declarations:
            self.fail("undeclared variable: %s" % token.text, token)

    # Programs.

    def program(self):
        declarations = []
        self.declarations = {}
        while self.at("directive"):
            declarations.append(self.declaration())
        rules = []
        while not self.at("eof"):
            rules.append(self.rule())
        return Program(tuple(declarations), tuple(rules))

    def declaration(self):
        directive = self.next()
        sort = directive.text[1:]
        if sort not in (syntax.SORT_RATIONAL, syntax.SORT_BOOLEAN):
            self.fail("unknown declaration %r" % directive.text, directive)
        name_token = self.expect("ident")
        if name_token.text in RESERVED:
            self.fail("reserved word %r cannot be declared" % name_token.text, name_token)
        if name_token.text in self.declarations:
            self.fail("duplicate declaration of %s" % name_token.text, name_token)
        domain = None
        if self.at("ident", "in"):
            if sort != syntax.SORT_RATIONAL:
                self.fail("candidate sets apply to rational variables", name_token)
            self.next()
            self.expect("op", "{")
            values = [self.domain_value()]
            while self.accept("op", ","):
                values.append(self.domain_value())
            self.expect("op", "}")
            domain = tuple(values)
        self.expect("op", ".")
        decl = VarDecl(name_token.text, sort, domain)
        self.declarations[decl.name] = decl
        return decl

    def domain_value(self):
        negate = bool(self.accept("op", "-"))
        token = self.expect("number")
        value = Fraction(token.text)
        return -value if negate else value

    def rule(self):
        scope = SCOPE_INITIAL
        if self.at("ident", "always"):
            mark = self.next()
            if not self.accept("op", ":"):
                self.fail("expected ':' after 'always'", mark)
            scope = SCOPE_ALWAYS
        head = self.rule_head()
        positive = []
        negative = []
        if self.accept("op", ":-"):
            while True:
                negated, literal = self.body_literal()
                (negative if negated else positive).append(literal)
                if not self.accept("op", ","):
                    break
        self.expect("op", ".")
        return Rule(head, tuple(positive), tuple(negative), scope)

    def rule_head(self):
        start = self.peek()
        node = self.comparison()
        if isinstance(node, Assign):
            return node
        if isinstance(node, Atom) and isinstance(node.atom, BoolIsTrue):
            return node
        self.fail("rule head must be an assignment or a Boolean atom", start)

    def body_literal(self):
        negated = bool(self.accept("ident", "not"))
        if self.accept("op", "("):
            literal = self.body_atom()
            self.expect("op", ")")
        else:
            literal = self.body_atom()
        return negated, literal

    def body_atom(self):
        token = self.peek()
        if (
            token.kind == "ident"
            and token.text not in RESERVED
            and token.text in self.registry
            and self.tokens[self.pos + 1].text == "("
        ):
            self.fail("custom atoms are not allowed in rule bodies", token)
        node = self.comparison()
        if not syntax.is_body_literal(node):
            self.fail("rule bodies admit constraint literals only", token)
        return node


def parse_formula(text, registry=None):
    """Parse a single formula; raises ParseError with a source span."""
    parser = _Parser(text, registry)
    out = parser.formula()
    parser.expect("eof")
    return out


def parse_program(text, registry=None):
    """Parse declarations followed by rules."""
    parser = _Parser(text, registry)
    return parser.program()


def parse_trace(text):
    """Parse a JSON trace document into a validated trace pair."""
    whole = SourceSpan(1, 1, 0, len(text))
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(
            "invalid trace document: %s" % err.msg,
            SourceSpan(err.lineno, err.colno, err.pos, err.pos + 1),
        )
    if not isinstance(doc, dict):
        raise ParseError("trace document must be a JSON object", whole)
    for key in ("length", "here", "there"):
        if key not in doc:
            raise ParseError("trace document lacks %r" % key, whole)
    length = doc["length"]
    here, there = doc["here"], doc["there"]
    if not isinstance(length, int) or length < 1:
        raise ParseError("trace length must be a positive integer", whole)
    for name, states in (("here", here), ("there", there)):
        if not isinstance(states, list) or len(states) != length:
            raise ParseError("%s must list exactly %d states" % (name, length), whole)

    def load_states(states):
        out = []
        for state in states:
            if not isinstance(state, dict):
                raise ParseError("states must be objects", whole)
            mapping = {}
            for key, value in state.items():
                if key == ONE:
                    raise ParseError("the constant pseudo-variable cannot be assigned", whole)
                try:
                    mapping[key] = parse_value(value)
                except (ValueError, TypeError):
                    raise ParseError("non-rational value for %s: %r" % (key, value), whole)
            out.append(mapping)
        return Trace(out)

    here_trace = load_states(here)
    there_trace = load_states(there)
    try:
        return HTcTrace(here_trace, there_trace)
    except ValueError as err:
        raise ParseError(str(err), whole)


# Printing -------------------------------------------------------------------


def _coeff_text(coeff):
    return format_value(coeff)


def print_temporal_term(term):
    if term.offset == 0:
        return term.variable
    return "%s@%d" % (term.variable, term.offset)


def print_linear_term(linterm):
    def piece(coeff, term):
        if term.variable == ONE:
            return _coeff_text(coeff)
        if coeff == 1:
            return print_temporal_term(term)
        return "%s*%s" % (_coeff_text(coeff), print_temporal_term(term))

    parts = []
    for index, (coeff, term) in enumerate(linterm.summands):
        if index == 0:
            parts.append(piece(coeff, term))
        elif coeff < 0:
            parts.append(" - " + piece(-coeff, term))
        else:
            parts.append(" + " + piece(coeff, term))
    return "".join(parts)


def print_atom(atom):
    if isinstance(atom, LinearLeq):
        return "%s <= %s" % (print_linear_term(atom.lhs), print_linear_term(atom.rhs))
    if isinstance(atom, BoolIsTrue):
        return print_temporal_term(atom.term)
    if isinstance(atom, CustomAtom):
        return "%s(%s)" % (atom.name, ", ".join(print_temporal_term(t) for t in atom.args))
    if isinstance(atom, Complement):
        return "complement(%s)" % print_atom(atom.inner)
    raise TypeError("not a constraint atom: %r" % (atom,))


_LEVEL_IFF = 0
_LEVEL_IMPLIES = 1
_LEVEL_OR = 2
_LEVEL_AND = 3
_LEVEL_TEMPORAL = 4
_LEVEL_PRIMARY = 5

_UNARY_TEXT = {
    Not: "not",
    Next: "X",
    Previous: "Y",
    WeakNext: "wX",
    WeakPrev: "wY",
    Always: "G",
    Eventually: "F",
    AlwaysPast: "H",
    EventuallyPast: "P",
}

_BINARY_TEMPORAL_TEXT = {Until: "U", Release: "R", Since: "S", Trigger: "T"}


def print_formula(formula):
    """Deterministic rendering; parsing the output restores the same tree."""

    def render(node, level):
        t = type(node)
        if t is Top:
            return "true"
        if t is Bottom:
            return "false"
        if t is Initial:
            return "I"
        if t is Final:
            return "Fin"
        if t is Atom:
            return print_atom(node.atom)
        if t is Eq:
            return "%s = %s" % (print_linear_term(node.lhs), print_linear_term(node.rhs))
        if t is Lt:
            return "%s < %s" % (print_linear_term(node.lhs), print_linear_term(node.rhs))
        if t is Neq:
            return "%s != %s" % (print_linear_term(node.lhs), print_linear_term(node.rhs))
        if t is Assign:
            return "%s := %s" % (print_temporal_term(node.target), print_linear_term(node.value))
        if t is Df:
            return "df(%s)" % print_linear_term(node.term)
        if t in _UNARY_TEXT:
            body = render(node.sub, _LEVEL_PRIMARY)
            if not _is_primary(node.sub):
                body = "(%s)" % body
            return "%s %s" % (_UNARY_TEXT[t], body)
        if t in _BINARY_TEMPORAL_TEXT:
            text = "%s %s %s" % (
                render(node.lhs, _LEVEL_PRIMARY),
                _BINARY_TEMPORAL_TEXT[t],
                render(node.rhs, _LEVEL_TEMPORAL),
            )
            return _wrap(text, level, _LEVEL_TEMPORAL)
        if t is And:
            text = "%s & %s" % (render(node.lhs, _LEVEL_AND), render(node.rhs, _LEVEL_TEMPORAL))
            return _wrap(text, level, _LEVEL_AND)
        if t is Or:
            text = "%s | %s" % (render(node.lhs, _LEVEL_OR), render(node.rhs, _LEVEL_AND))
            return _wrap(text, level, _LEVEL_OR)
        if t is Implies:
            text = "%s -> %s" % (render(node.lhs, _LEVEL_OR), render(node.rhs, _LEVEL_IMPLIES))
            return _wrap(text, level, _LEVEL_IMPLIES)
        if t is Iff:
            text = "%s <-> %s" % (render(node.lhs, _LEVEL_IFF), render(node.rhs, _LEVEL_IMPLIES))
            return _wrap(text, level, _LEVEL_IFF)
        raise TypeError("not a formula node: %r" % (node,))

    def _is_primary(node):
        return type(node) in (
            Top,
            Bottom,
            Initial,
            Final,
            Atom,
            Eq,
            Lt,
            Neq,
            Assign,
            Df,
        ) or type(node) in _UNARY_TEXT

    def _wrap(text, level, own):
        return text if own >= level else "(%s)" % text

    return render(formula, _LEVEL_IFF)


def print_rule(rule):
    head = print_formula(rule.head)
    body = [print_formula(lit) for lit in rule.positive_body]
    body += ["not (%s)" % print_formula(lit) for lit in rule.negative_body]
    text = head if not body else "%s :- %s" % (head, ", ".join(body))
    prefix = "always: " if rule.scope == SCOPE_ALWAYS else ""
    return "%s%s." % (prefix, text)


def print_program(program):
    lines = []
    for decl in program.declarations:
        domain = ""
        if decl.domain is not None:
            domain = " in {%s}" % ", ".join(format_value(v) for v in decl.domain)
        lines.append("#%s %s%s." % (decl.sort, decl.name, domain))
    if program.declarations and program.rules:
        lines.append("")
    lines.extend(print_rule(rule) for rule in program.rules)
    return "\n".join(lines) + "\n"


def trace_document(ht):
    """The JSON-ready dictionary for a trace pair."""

    def states(trace):
        return [
            {name: format_value(value) for name, value in sorted(val.items())}
            for val in trace.valuations
        ]

    return {
        "length": ht.length,
        "here": states(ht.here),
        "there": states(ht.there),
    }


def print_trace(ht):
    """Canonical JSON text for a trace pair; byte-identical across runs."""
    return json.dumps(trace_document(ht), sort_keys=True, indent=2) + "\n"
