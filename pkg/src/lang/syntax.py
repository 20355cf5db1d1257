"""S-expression reader and printer for terms and patterns."""

import logging

import pyparsing as pp

from src.errors import NegativeIndexError, TermSyntaxError
from src.lang.term import EPS, All, App, Bvar, Lam, Let, Lit, Meta, Sym, children

logger = logging.getLogger(__name__)

pp.ParserElement.enable_packrat()

NEGATIVE_INDEX = "negative de Bruijn index"
SYMBOL_RE = r"[A-Za-z_][A-Za-z0-9_.']*"


def _natural(allow_negative_check):
    def check(s, loc, toks):
        value = int(toks[0])
        if value < 0 and allow_negative_check:
            raise pp.ParseFatalException(s, loc, NEGATIVE_INDEX)
        if value < 0:
            raise pp.ParseFatalException(s, loc, "expected a natural number")
        return value
    return pp.Regex(r"-?\d+").set_parse_action(check)


def _build_grammar(allow_meta):
    term = pp.Forward()
    lp, rp = pp.Suppress("("), pp.Suppress(")")

    tag = pp.Suppress(":") + pp.QuotedString('"', esc_char="\\")
    bvar = (lp + pp.Keyword("bvar").suppress() + _natural(True) + pp.Optional(tag) + rp).set_parse_action(
        lambda t: Bvar(t[0], t[1] if len(t) > 1 else None))

    def fold_app(t):
        out = t[0]
        for arg in t[1:]:
            out = App(out, arg)
        return out

    app = (lp + pp.Keyword("app").suppress() + term + pp.OneOrMore(term) + rp).set_parse_action(fold_app)
    lam = (lp + pp.Keyword("lam").suppress() + term + term + rp).set_parse_action(lambda t: Lam(t[0], t[1]))
    forall = (lp + pp.Keyword("all").suppress() + term + term + rp).set_parse_action(lambda t: All(t[0], t[1]))
    let = (lp + pp.Keyword("let").suppress() + term + term + term + rp).set_parse_action(
        lambda t: Let(t[0], t[1], t[2]))
    lit = (lp + pp.Keyword("lit").suppress() + _natural(False) + rp).set_parse_action(lambda t: Lit(t[0]))
    eps = pp.Keyword("eps", ident_chars=pp.alphanums + "_.'").set_parse_action(lambda: EPS)
    symbol = pp.Regex(SYMBOL_RE).set_parse_action(lambda t: Sym(t[0]))

    alternatives = bvar | app | lam | forall | let | lit | eps | symbol
    if allow_meta:
        meta = pp.Regex(r"\?" + SYMBOL_RE).set_parse_action(lambda t: Meta(t[0][1:]))
        alternatives = meta | alternatives
    term <<= alternatives
    return term


TERM_GRAMMAR = _build_grammar(allow_meta=False)
PATTERN_GRAMMAR = _build_grammar(allow_meta=True)


def _parse(grammar, text):
    try:
        return grammar.parse_string(text, parse_all=True)[0]
    except pp.ParseBaseException as e:
        offset = len(text[:e.loc].encode("utf-8"))
        if e.msg == NEGATIVE_INDEX:
            raise NegativeIndexError(NEGATIVE_INDEX, offset) from None
        raise TermSyntaxError(e.msg, offset) from None


def parse_term(text):
    return _parse(TERM_GRAMMAR, text)


def parse_pattern(text):
    return _parse(PATTERN_GRAMMAR, text)


def _quote(tag):
    return '"' + tag.replace("\\", "\\\\").replace('"', '\\"') + '"'


def print_term(t):
    if isinstance(t, Bvar):
        if t.tag is None:
            return f"(bvar {t.index})"
        return f"(bvar {t.index} : {_quote(t.tag)})"
    if isinstance(t, Sym):
        return t.name
    if isinstance(t, Lit):
        return f"(lit {t.value})"
    if t == EPS:
        return "eps"
    if isinstance(t, Meta):
        return f"?{t.name}"
    head = {App: "app", Lam: "lam", All: "all", Let: "let"}[type(t)]
    return f"({head} " + " ".join(print_term(c) for c in children(t)) + ")"
