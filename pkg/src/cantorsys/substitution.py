"""Primitive substitutions on finite alphabets and their subshifts.

Iteration, primitivity and aperiodicity decisions, exact letter/word
frequencies, language generation, return words, derived substitutions and a
constructive check that the subshift is conjugate to its induced system on
the image of the substitution.

The recognizability machinery works by exhaustive tiling: a finite window is
decomposed in every possible way into images of letters (with partial images
allowed at both ends), keeping only decompositions whose read-off preimage
word lies in the language.  Everything downstream of that enumeration is
exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from . import matrixutil
from .errors import (
    ConstructionError,
    EmptyClopen,
    EmptyWord,
    HorizonTooSmall,
    NoFixedLetterPower,
    NotPrimitive,
    Periodic,
    RecognizabilityUnknown,
    WindowExhausted,
)
from .words import (
    Alphabet,
    ClopenSet,
    Cylinder,
    Language,
    Letter,
    SystemHandle,
    Word,
    letter_key,
)


class Substitution:
    """A morphism letter -> non-empty word, extended by concatenation."""

    def __init__(self, alphabet: Alphabet, rules: Mapping[Letter, object]):
        images = {}
        for a in alphabet:
            if a not in rules:
                raise ConstructionError(f"no rule for letter {a!r}")
            images[a] = _as_letters(rules[a])
            if not images[a]:
                raise ConstructionError(f"rule for {a!r} is empty")
            for b in images[a]:
                if b not in alphabet:
                    raise ConstructionError(f"image letter {b!r} not in alphabet")
        if set(rules) - set(alphabet.letters):
            raise ConstructionError("rules mention letters outside the alphabet")
        self._alphabet = alphabet
        self._images = images
        self._lang_cache: dict[int, Language] = {}
        self._power_cache: dict[int, "Substitution"] = {}
        self._radius_cache: dict[int, int | None] = {}
        self._primitivity: "PrimitivityReport | None" = None
        self._periodicity: "PeriodicityResult | None" = None
        self._power_root: "Substitution" = self

    @property
    def alphabet(self) -> Alphabet:
        return self._alphabet

    def image(self, a: Letter) -> Word:
        return Word(self._images[a])

    def image_letters(self, a: Letter) -> tuple:
        return self._images[a]

    @property
    def rules(self) -> dict:
        return {a: Word(img) for a, img in self._images.items()}

    def max_image_length(self) -> int:
        return max(len(img) for img in self._images.values())

    def min_image_length(self) -> int:
        return min(len(img) for img in self._images.values())

    def is_constant_length(self) -> bool:
        return self.max_image_length() == self.min_image_length()

    def apply_letters(self, letters: Iterable[Letter]) -> tuple:
        out: list = []
        for a in letters:
            out.extend(self._images[a])
        return tuple(out)

    def apply(self, w: Word) -> Word:
        return Word(self.apply_letters(w.letters))

    def power(self, k: int) -> "Substitution":
        """The substitution with rules a -> sigma^k(a).

        Powers generate the same subshift, so they share the root's language
        cache and periodicity verdict."""
        if k < 1:
            raise ConstructionError("power must be >= 1")
        if k == 1:
            return self
        if k not in self._power_cache:
            rules = {}
            for a in self._alphabet:
                img = (a,)
                for _ in range(k):
                    img = self.apply_letters(img)
                rules[a] = img
            sk = Substitution(self._alphabet, rules)
            sk._lang_cache = self._lang_cache
            sk._power_root = self._power_root
            self._power_cache[k] = sk
        return self._power_cache[k]

    def language_at(self, horizon: int) -> Language:
        """Cached language; grows the cache monotonically."""
        best = max((h for h in self._lang_cache if h >= horizon), default=None)
        if best is not None:
            cached = self._lang_cache[best]
            if best == horizon:
                return cached
            return Language(
                {n: cached.words(n) for n in range(1, horizon + 1)}, horizon, check=False
            )
        lang = language(self, horizon)
        self._lang_cache[horizon] = lang
        return lang

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Substitution)
            and self._alphabet == other._alphabet
            and self._images == other._images
        )

    def __hash__(self) -> int:
        return hash((self._alphabet, tuple(sorted(self._images.items(), key=lambda kv: letter_key(kv[0])))))

    def __repr__(self) -> str:
        rules = ", ".join(
            f"{a}->{''.join(str(x) for x in img)}" for a, img in self._images.items()
        )
        return f"Substitution({rules})"


def _as_letters(rule) -> tuple:
    if isinstance(rule, Word):
        return rule.letters
    if isinstance(rule, str):
        return tuple(rule)
    return tuple(rule)


# -- named examples ------------------------------------------------------

def period_doubling() -> Substitution:
    return Substitution(Alphabet(["0", "1"]), {"0": "01", "1": "00"})


def fibonacci() -> Substitution:
    return Substitution(Alphabet(["0", "1"]), {"0": "01", "1": "0"})


def thue_morse() -> Substitution:
    return Substitution(Alphabet(["0", "1"]), {"0": "01", "1": "10"})


def chacon() -> Substitution:
    return Substitution(Alphabet(["0", "1"]), {"0": "0010", "1": "1"})


# -- basic operations ----------------------------------------------------

def iterate(s: Substitution, w: Word, k: int) -> Word:
    """sigma^k(w); sigma^0 is the identity."""
    if len(w) == 0:
        raise EmptyWord("iterate needs a non-empty word")
    letters = w.letters
    for _ in range(k):
        letters = s.apply_letters(letters)
    return Word(letters)


def composition_matrix(s: Substitution) -> matrixutil.Matrix:
    """Entry (a, b) counts occurrences of a in sigma(b); columns sum to |sigma(b)|."""
    letters = s.alphabet.letters
    return tuple(
        tuple(s.image_letters(b).count(a) for b in letters) for a in letters
    )


@dataclass(frozen=True)
class PrimitivityReport:
    primitive: bool
    witness_exponent: int | None
    failing_pair: tuple | None
    growth: bool
    bound: int

    def __bool__(self) -> bool:
        return self.primitive


def is_primitive(s: Substitution) -> PrimitivityReport:
    """Primitive iff some matrix power <= 2*#alphabet^2 is entrywise positive
    and some image has length >= 2 (which under positivity gives unbounded
    growth of every column sum)."""
    if s._primitivity is not None:
        return s._primitivity
    matrix = composition_matrix(s)
    bound = 2 * len(s.alphabet) ** 2
    exponent = matrixutil.positivity_exponent(matrix, bound)
    growth = s.max_image_length() >= 2
    if exponent is not None and growth:
        s._primitivity = PrimitivityReport(True, exponent, None, True, bound)
        return s._primitivity
    failing = None
    if exponent is None:
        reach = matrix
        seen = [[x > 0 for x in row] for row in matrix]
        for _ in range(bound - 1):
            reach = matrixutil.mat_mul(reach, matrix)
            for i, row in enumerate(reach):
                for j, x in enumerate(row):
                    if x > 0:
                        seen[i][j] = True
        letters = s.alphabet.letters
        for j, a in enumerate(letters):
            for i, b in enumerate(letters):
                if not seen[i][j]:
                    failing = (a, b)
                    break
            if failing:
                break
    s._primitivity = PrimitivityReport(False, None, failing, growth, bound)
    return s._primitivity


def _require_primitive(s: Substitution) -> None:
    report = is_primitive(s)
    if not report:
        raise NotPrimitive(
            f"substitution is not primitive (pair={report.failing_pair}, growth={report.growth})"
        )


def language(s: Substitution, horizon: int) -> Language:
    """The language of the subshift up to the horizon.

    Computed as the least fixed point of "close under factors of images".
    A factor of sigma(u) of length <= horizon spans at most horizon letters
    of u, and every language word extends to a full-length one, so it is
    enough to saturate the set of length-`horizon` words under
    u -> factors(sigma(u)) and harvest the shorter factors at the end.
    """
    report = is_primitive(s)
    if not report:
        raise NotPrimitive(
            f"substitution is not primitive (pair={report.failing_pair}, growth={report.growth})"
        )
    if horizon < 1:
        raise ConstructionError("horizon must be >= 1")
    seed = (s.alphabet.letters[0],)
    exponent = report.witness_exponent or 1
    for _ in range(exponent):
        seed = s.apply_letters(seed)
    while len(seed) < 2 * horizon:
        seed = s.apply_letters(seed)

    full: set[tuple] = set()
    frontier: list[tuple] = []
    for i in range(len(seed) - horizon + 1):
        u = seed[i : i + horizon]
        if u not in full:
            full.add(u)
            frontier.append(u)
    while frontier:
        fresh: list[tuple] = []
        for u in frontier:
            img = s.apply_letters(u)
            for i in range(len(img) - horizon + 1):
                v = img[i : i + horizon]
                if v not in full:
                    full.add(v)
                    fresh.append(v)
        frontier = fresh

    by_length: dict[int, set[Word]] = {n: set() for n in range(1, horizon + 1)}
    by_length[horizon] = {Word(u) for u in full}
    shorter: set[tuple] = set()
    for u in full:
        for n in range(1, horizon):
            for i in range(horizon - n + 1):
                shorter.add(u[i : i + n])
    for w in shorter:
        by_length[len(w)].add(Word(w))
    return Language(by_length, horizon)


@dataclass(frozen=True)
class AperiodicityCertificate:
    period_bound: int
    complexity: tuple[int, ...]
    strictly_increasing: bool


@dataclass(frozen=True)
class PeriodicityResult:
    periodic: bool
    word: Word | None
    certificate: AperiodicityCertificate | None

    def __bool__(self) -> bool:
        return self.periodic


def periodicity_check(s: Substitution) -> PeriodicityResult:
    """Decide periodicity through the factor complexity, searched up to twice
    #alphabet * (max image length)^2.

    By Morse-Hedlund, a minimal subshift is a single periodic orbit exactly
    when p(n) <= n for some n; the period then equals that p(n) and the orbit
    word is read off the language.  A plain inclusion test of the candidate's
    power factors is too weak: aperiodic subshifts contain every factor of
    fairly long periodic words.  Heuristic-complete: periods beyond the bound
    are not searched.
    """
    _require_primitive(s)
    p_bound = len(s.alphabet) * s.max_image_length() ** 2
    horizon = 2 * p_bound
    lang = s.language_at(horizon)
    complexity = tuple(len(lang.words(n)) for n in range(1, horizon + 1))
    for n in range(1, horizon + 1):
        if complexity[n - 1] <= n:
            period = complexity[n - 1]
            seed = lang.words(n)[0][:period]
            rotations = [
                Word(seed.letters[i:] + seed.letters[:i]) for i in range(period)
            ]
            word = min(rotations, key=Word.sort_key)
            reps = horizon // period + 2
            text = word.letters * reps
            for m in range(1, horizon + 1):
                cycle_factors = {Word(text[i : i + m]) for i in range(period)}
                if cycle_factors != set(lang.words(m)):
                    raise ConstructionError(
                        "complexity indicates a periodic orbit the language does not match"
                    )
            return PeriodicityResult(True, word, None)
    increasing = all(b > a for a, b in zip(complexity, complexity[1:]))
    if not increasing:
        raise ConstructionError(
            "factor complexity plateaus but no period within the bound was found"
        )
    return PeriodicityResult(
        False, None, AperiodicityCertificate(p_bound, complexity, increasing)
    )


def periodicity_cached(s: Substitution) -> PeriodicityResult:
    """Periodicity of the subshift; powers defer to their root substitution
    (same subshift, much smaller search bound)."""
    if s._periodicity is None:
        root = s._power_root
        if root._periodicity is None:
            root._periodicity = periodicity_check(root)
        s._periodicity = root._periodicity
    return s._periodicity


def _require_aperiodic(s: Substitution) -> None:
    result = periodicity_cached(s)
    if result.periodic:
        raise Periodic(f"subshift is periodic with word {result.word!r}")


def frequency_data(s: Substitution) -> matrixutil.PerronData:
    _require_primitive(s)
    return matrixutil.perron(composition_matrix(s))


def frequencies(s: Substitution) -> dict:
    """Letter frequencies: the normalised Perron eigenvector of the
    composition matrix (exact fractions for integer eigenvalues)."""
    data = frequency_data(s)
    return dict(zip(s.alphabet.letters, data.vector))


def word_frequencies(s: Substitution, m: int) -> dict[Word, Fraction]:
    """Exact frequencies of the length-m words, for constant-length rules.

    Every occurrence of an m-word sits at one of L offsets inside the image
    of an m'-word, giving a rational self-consistency system with a unique
    normalised solution (unique ergodicity).
    """
    _require_primitive(s)
    if not s.is_constant_length():
        raise ConstructionError("exact word frequencies need a constant-length substitution")
    length = s.max_image_length()
    m_src = -(-(m + length - 1) // length)  # ceil
    lang = s.language_at(max(m, m_src))
    words = lang.words(m)
    index = {w: i for i, w in enumerate(words)}
    d = len(words)
    rows = [[Fraction(0)] * d for _ in range(d)]
    inv_l = Fraction(1, length)
    for j, v in enumerate(words):
        u = v[:m_src]
        img = s.apply_letters(u.letters)
        for o in range(length):
            w = Word(img[o : o + m])
            if w in index:
                rows[index[w]][j] += inv_l
    for i in range(d):
        rows[i][i] -= 1
    solution = matrixutil.fraction_nullspace_positive(rows)
    if solution is None:
        raise ConstructionError("word frequency system is not uniquely solvable")
    return {w: solution[i] for i, w in enumerate(words)}


def clopen_measure(s: Substitution, clopen: ClopenSet) -> Fraction:
    """Exact invariant measure of a clopen set (constant-length rules)."""
    total = Fraction(0)
    width = clopen.past_length + clopen.future_length
    freqs = word_frequencies(s, width)
    for c in clopen:
        total += freqs.get(c.past + c.future, Fraction(0))
    return total


# -- tilings and recognizability ------------------------------------------


@dataclass(frozen=True)
class Tiling:
    """One decomposition of a window into images of letters.

    `cuts` lists every block boundary inside [0, len(window)]; a missing 0
    (resp. missing end position) means the border block straddles that edge.
    `interior` are the letters of the complete blocks, `left`/`right` the
    letters of the straddling blocks (equal for a single straddling block).
    """

    cuts: tuple[int, ...]
    interior: tuple
    left: Letter | None
    left_offset: int
    right: Letter | None

    def has_cut(self, position: int) -> bool:
        return position in self.cuts

    def preimage_letters(self) -> tuple:
        out = []
        if self.left is not None:
            out.append(self.left)
        out.extend(self.interior)
        if self.right is not None and not (self.left is not None and not self.cuts):
            out.append(self.right)
        return tuple(out)


def image_tilings(
    s: Substitution, window: tuple, require_language: bool = True
) -> tuple[Tiling, ...]:
    """All decompositions of the window into sigma-images, partial at the
    edges, whose preimage letter word belongs to the language."""
    n = len(window)
    if n == 0:
        raise ConstructionError("cannot tile an empty window")
    images = {a: s.image_letters(a) for a in s.alphabet}
    lang = s.language_at(n + 2) if require_language else None
    results: list[Tiling] = []

    def record(cuts: tuple[int, ...], interior: tuple, left, left_offset: int, right) -> None:
        tiling = Tiling(cuts, interior, left, left_offset, right)
        if require_language:
            pre = tiling.preimage_letters()
            if pre and Word(pre) not in lang:
                return
        results.append(tiling)

    def extend(pos: int, cuts: list[int], interior: list, left, left_offset: int) -> None:
        """Continue a tiling whose last cut is at `pos`."""
        if pos == n:
            record(tuple(cuts), tuple(interior), left, left_offset, None)
            return
        for a, img in images.items():
            size = len(img)
            if pos + size <= n:
                if img == window[pos : pos + size]:
                    cuts.append(pos + size)
                    interior.append(a)
                    extend(pos + size, cuts, interior, left, left_offset)
                    interior.pop()
                    cuts.pop()
            else:
                if img[: n - pos] == window[pos:]:
                    record(tuple(cuts), tuple(interior), left, left_offset, a)

    # window strictly inside one image: no cuts at all
    for a, img in images.items():
        for u in range(1, len(img)):
            if u + n < len(img) and img[u : u + n] == window:
                record((), (), a, u, a)

    # left edge at a cut
    extend(0, [0], [], None, 0)

    # left edge inside an image whose remainder ends at a cut c <= n
    for a, img in images.items():
        for u in range(1, len(img)):
            c = len(img) - u
            if c <= n and img[u:] == window[:c]:
                extend(c, [c], [], a, u)

    seen = set()
    unique = []
    for t in results:
        key = (t.cuts, t.interior, t.left, t.left_offset, t.right)
        if key not in seen:
            seen.add(key)
            unique.append(t)
    unique.sort(
        key=lambda t: (t.cuts, tuple(map(str, t.interior)), str(t.left), t.left_offset, str(t.right))
    )
    return tuple(unique)


def cut_statuses(s: Substitution, window: tuple, position: int) -> set[bool]:
    """The set {does a legal tiling place a block boundary at `position`}."""
    return {t.has_cut(position) for t in image_tilings(s, window)}


def recognizability_radius(s: Substitution, bound: int) -> int | None:
    """Smallest R <= bound such that every (2R+1)-word of the language fixes
    the cut-or-not answer at its centre, or None (Unknown)."""
    _require_primitive(s)
    _require_aperiodic(s)
    if bound in s._radius_cache:
        return s._radius_cache[bound]
    answer = None
    for radius in range(bound + 1):
        lang = s.language_at(2 * radius + 1)
        ok = True
        for w in lang.words(2 * radius + 1):
            statuses = cut_statuses(s, w.letters, radius)
            if len(statuses) != 1:
                ok = False
                break
        if ok:
            answer = radius
            break
    s._radius_cache[bound] = answer
    return answer


def image_clopen(s: Substitution, radius: int) -> ClopenSet:
    """sigma(X) as a union of radius-`radius` cylinders: the (2R+1)-words
    whose centre is unambiguously a block boundary."""
    lang = s.language_at(2 * radius + 1)
    cylinders = []
    for w in lang.words(2 * radius + 1):
        statuses = cut_statuses(s, w.letters, radius)
        if statuses == {True}:
            cylinders.append(Cylinder(w[:radius], w[radius:]))
    if not cylinders:
        raise EmptyClopen(f"no unambiguous block boundaries at radius {radius}")
    return ClopenSet(cylinders)


# -- return words ----------------------------------------------------------


@dataclass(frozen=True)
class ReturnWordSet:
    """Return words to a clopen set, plain and decorated.

    A decorated entry (u-, w, u+) records the past word at the visit that
    starts w and the future word at the next visit, so u- w u+ is always a
    language word; erasing the decorations gives the plain set.
    """

    plain: frozenset[Word]
    decorated: frozenset[tuple[Word, Word, Word]]
    certified_horizon: int

    @staticmethod
    def theta(triple: tuple[Word, Word, Word]) -> Word:
        return triple[1]

    def sorted_plain(self) -> tuple[Word, ...]:
        return tuple(sorted(self.plain, key=Word.sort_key))


def _long_text(s: Substitution, min_length: int) -> tuple:
    a = s.alphabet.letters[0]
    text = (a,)
    while len(text) < min_length:
        text = s.apply_letters(text)
    return text


def return_words(s: Substitution, clopen: ClopenSet, horizon: int) -> ReturnWordSet:
    """Left-anchored return words: each starts at a visit of the set and ends
    one position before the next visit.  Certified when doubling the scan
    horizon finds nothing new."""
    _require_primitive(s)
    _require_aperiodic(s)
    width = clopen.past_length + clopen.future_length
    lang = s.language_at(max(width, 1))
    for c in clopen:
        if width and (c.past + c.future) not in lang:
            raise EmptyClopen(f"cylinder {c} is empty in the subshift")

    pad = max(clopen.past_length, clopen.future_length)
    text = _long_text(s, 2 * horizon + 2 * pad + 2)

    def scan(limit: int):
        occurrences = [
            p
            for p in range(pad, pad + limit)
            if clopen.contains_at(text, p)
        ]
        plain = set()
        decorated = set()
        for i, j in zip(occurrences, occurrences[1:]):
            w = Word(text[i:j])
            plain.add(w)
            past = Word(text[i - clopen.past_length : i])
            future = Word(text[j : j + clopen.future_length])
            decorated.add((past, w, future))
        return plain, decorated

    plain_1, decorated_1 = scan(horizon)
    plain_2, decorated_2 = scan(2 * horizon)
    if not plain_1 or plain_1 != plain_2 or decorated_1 != decorated_2:
        raise HorizonTooSmall(
            f"return words did not stabilise at horizon {horizon}"
        )
    return ReturnWordSet(frozenset(plain_2), frozenset(decorated_2), horizon)


# -- derived substitutions (self-induction on a letter cylinder) ------------


@dataclass(frozen=True)
class DerivedSubstitution:
    """tau on the return words to [a], with theta o tau = sigma^power o theta."""

    tau: Substitution
    theta: dict
    power: int

    def theta_word(self, w: Word) -> Word:
        out: list = []
        for name in w:
            out.extend(self.theta[name].letters)
        return Word(out)


def derive(s: Substitution, a: Letter) -> DerivedSubstitution:
    """The substitution induced on the return words to the cylinder [a].

    Needs some power k with sigma^k(a) starting with a (the first-letter map
    must cycle through a); the derived rules decompose sigma^k of each return
    word at the visits of [a], and the defining relation is checked exactly.
    """
    _require_primitive(s)
    _require_aperiodic(s)
    if a not in s.alphabet:
        raise ConstructionError(f"letter {a!r} not in alphabet")
    first = a
    power = None
    for k in range(1, len(s.alphabet) + 1):
        first = s.image_letters(first)[0]
        if first == a:
            power = k
            break
    if power is None:
        raise NoFixedLetterPower(
            f"no power <= {len(s.alphabet)} of the substitution fixes the first letter {a!r}"
        )
    sk = s.power(power)

    horizon = 256
    returns = None
    while horizon <= (1 << 16):
        try:
            returns = return_words(
                s, ClopenSet([Cylinder(Word(), Word((a,)))]), horizon
            )
            break
        except HorizonTooSmall:
            horizon *= 2
    if returns is None:
        raise HorizonTooSmall("return words to the letter cylinder did not stabilise")

    # name return words in order of first occurrence along the fixed point of
    # sigma^power starting at the chosen letter
    text = (a,)
    ordered: list[Word] = []
    while len(text) < (1 << 18):
        text = sk.apply_letters(text)
        occurrences = [p for p in range(len(text)) if text[p] == a]
        ordered = []
        for i, j in zip(occurrences, occurrences[1:]):
            w = Word(text[i:j])
            if w not in ordered:
                ordered.append(w)
        if set(ordered) == set(returns.plain):
            break
    if set(ordered) != set(returns.plain):
        raise HorizonTooSmall("return word enumeration disagrees with the certified set")
    names = [_derived_name(i) for i in range(len(ordered))]
    by_word = dict(zip(ordered, names))
    theta = dict(zip(names, ordered))

    rules = {}
    for w, name in by_word.items():
        img = sk.apply_letters(w.letters)
        cuts = [p for p in range(len(img)) if img[p] == a]
        if not cuts or cuts[0] != 0:
            raise ConstructionError("image of a return word must start at a visit")
        segments = [
            Word(img[i:j]) for i, j in zip(cuts, cuts[1:] + [len(img)])
        ]
        try:
            rules[name] = Word(tuple(by_word[seg] for seg in segments))
        except KeyError as exc:
            raise HorizonTooSmall(f"unseen return word {exc} in a decomposition") from None

    tau = Substitution(Alphabet(names), rules)
    derived = DerivedSubstitution(tau, theta, power)
    for name in names:
        lhs = derived.theta_word(rules[name])
        rhs = iterate(s, theta[name], power)
        if lhs != rhs:
            raise ConstructionError(f"theta o tau != sigma^{power} o theta at {name}")
    return derived


def _derived_name(i: int) -> str:
    if i < 26:
        return chr(ord("A") + i)
    return f"R{i}"


# -- self-induction verification -------------------------------------------


@dataclass(frozen=True)
class SelfInductionReport:
    radius: int
    clopen_size: int
    samples: int
    depth: int
    return_times: tuple[int, ...]
    image_lengths: tuple[int, ...]
    failures: tuple[str, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return not self.failures


def verify_self_induced(
    s: Substitution, depth: int, samples: int, radius_bound: int = 8
) -> SelfInductionReport:
    """Constructive self-induction check on sampled windows.

    U = sigma(X) is expressed through the recognizability cylinders; on each
    sampled window the first return of sigma(x) to U must happen exactly at
    |sigma(x_0)| and the induced step must agree with sigma(S(x)) letter by
    letter on the overlap of the requested depth.  Sampling is a
    deterministic enumeration of window positions in an iterated image.
    """
    radius = recognizability_radius(s, radius_bound)
    if radius is None:
        raise RecognizabilityUnknown(f"no recognizability radius <= {radius_bound}")
    clopen = image_clopen(s, radius)

    max_len = s.max_image_length()
    margin = depth + radius + max_len + 2
    text = _long_text(s, max(8 * margin, (samples + 2) * 4))
    image = s.apply_letters(text)
    cum = [0]
    for letter in text:
        cum.append(cum[-1] + len(s.image_letters(letter)))

    first = margin
    last = len(text) - margin - 1
    if last <= first:
        raise ConstructionError("text too short for the requested depth")
    step = max(1, (last - first) // samples)
    origins = [first + i * step for i in range(samples)]

    failures: list[str] = []
    return_times: list[int] = []
    image_lengths: list[int] = []
    for o in origins:
        o_img = cum[o]
        w = len(s.image_letters(text[o]))
        image_lengths.append(w)
        if not clopen.contains_at(image, o_img):
            failures.append(f"sigma(x) not in U at origin {o}")
            continue
        measured = None
        for n in range(1, w + 1):
            if clopen.contains_at(image, o_img + n):
                measured = n
                break
        return_times.append(measured if measured is not None else -1)
        if measured != w:
            failures.append(
                f"return time {measured} != |sigma(x_0)| = {w} at origin {o}"
            )
        # independent recomputation of sigma(S(x)) against S^w(sigma(x))
        lo, hi = o + 1 - margin, o + 1 + margin
        window = text[lo:hi]
        reimage = s.apply_letters(window)
        re_origin = sum(len(s.image_letters(b)) for b in window[: margin])
        span = depth
        lhs = reimage[re_origin - span : re_origin + span]
        rhs = image[o_img + w - span : o_img + w + span]
        if lhs != rhs:
            failures.append(f"sigma(Sx) != S^w(sigma x) on overlap at origin {o}")

    return SelfInductionReport(
        radius=radius,
        clopen_size=len(clopen),
        samples=samples,
        depth=depth,
        return_times=tuple(return_times),
        image_lengths=tuple(image_lengths),
        failures=tuple(failures),
    )


def two_sided_orbit_window(
    s: Substitution, b: Letter, c: Letter, radius: int, max_iters: int = 64
) -> tuple[tuple, tuple, int, int]:
    """Window [-radius, radius) of the omega-limit of ...b.c... under the
    two-sided extension; returns (left, right, settle_iteration, period)."""
    keep = radius * s.max_image_length() + radius + 4
    left = (b,)
    right = (c,)
    seen: dict[tuple, int] = {}
    for it in range(1, max_iters + 1):
        left = s.apply_letters(left)[-keep:]
        right = s.apply_letters(right)[:keep]
        window = (left[-radius:], right[:radius])
        if len(window[0]) == radius and len(window[1]) == radius:
            if window in seen:
                return window[0], window[1], it, it - seen[window]
            seen[window] = it
    raise ConstructionError(f"no recurring window within {max_iters} iterations")


# -- a substitution subshift as a SystemHandle ------------------------------


@dataclass(frozen=True)
class ShiftPoint:
    """A point of the subshift seen through a finite window with an origin."""

    text: tuple
    origin: int


class SubstitutionShiftHandle(SystemHandle):
    """(X_sigma, S) with target U = sigma(X_sigma) and phi = sigma.

    Points are windows into iterated images; every membership question is
    answered by the exhaustive tiling test at the recognizability radius.
    """

    def __init__(self, s: Substitution, depth: int = 64, radius_bound: int = 8):
        radius = recognizability_radius(s, radius_bound)
        if radius is None:
            raise RecognizabilityUnknown(f"no recognizability radius <= {radius_bound}")
        self._s = s
        self._radius = radius
        self.depth = depth
        self.name = f"shift({s!r})"
        self._margin = depth + radius + s.max_image_length() + 2
        self._text = _long_text(s, 8 * self._margin)
        self._power_radii: dict[int, int] = {1: radius}

    @property
    def substitution(self) -> Substitution:
        return self._s

    def _guard(self, point: ShiftPoint, room: int = 1) -> None:
        if point.origin - room - self._radius < 0 or point.origin + room + self._radius > len(point.text):
            raise WindowExhausted("window margin exhausted")

    def step(self, point: ShiftPoint) -> ShiftPoint:
        self._guard(point)
        return ShiftPoint(point.text, point.origin + 1)

    def step_back(self, point: ShiftPoint) -> ShiftPoint:
        self._guard(point)
        return ShiftPoint(point.text, point.origin - 1)

    def in_target(self, point: ShiftPoint) -> bool:
        return self.in_iterated_image(point, 1)

    def phi(self, point: ShiftPoint) -> ShiftPoint:
        new_origin = sum(
            len(self._s.image_letters(b)) for b in point.text[: point.origin]
        )
        return ShiftPoint(self._s.apply_letters(point.text), new_origin)

    def in_iterated_image(self, point: ShiftPoint, power: int) -> bool:
        sk = self._s.power(power) if power > 1 else self._s
        if power not in self._power_radii:
            bound = 4 * sk.max_image_length()
            rad = recognizability_radius(sk, bound)
            if rad is None:
                raise RecognizabilityUnknown(f"power {power} not recognizable within {bound}")
            self._power_radii[power] = rad
        rad = self._power_radii[power]
        lo, hi = point.origin - rad, point.origin + rad + 1
        if lo < 0 or hi > len(point.text):
            raise WindowExhausted("window too short for a membership test")
        statuses = cut_statuses(sk, point.text[lo:hi], rad)
        if len(statuses) != 1:
            raise ConstructionError("ambiguous membership inside the recognizability radius")
        return statuses.pop()

    def cells(self, resolution: int) -> tuple:
        lang = self._s.language_at(2 * resolution)
        return lang.words(2 * resolution)

    def cell_of(self, point: ShiftPoint, resolution: int) -> Word:
        lo, hi = point.origin - resolution, point.origin + resolution
        if lo < 0 or hi > len(point.text):
            raise WindowExhausted("window too short for the requested resolution")
        return Word(point.text[lo:hi])

    def representative(self, cell: Word) -> ShiftPoint:
        target = cell.letters
        m = len(target) // 2
        for p in range(self._margin, len(self._text) - self._margin - len(target)):
            if self._text[p : p + len(target)] == target:
                return ShiftPoint(self._text, p + m)
        raise ConstructionError(f"cell {cell!r} does not occur in the sample text")
