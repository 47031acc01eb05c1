"""Reference brute-force check for ultimate periodicity of a finite prefix.

Independent of the decision procedure: it knows nothing about morphisms and
simply searches preperiod/period pairs against an explicitly expanded prefix.
"""

from .errors import PreconditionError
from .words import as_word


def brute_force_up_check(prefix, max_pre, max_per):
    """Smallest (|u|, |v|) in lexicographic order with |u| <= max_pre and
    1 <= |v| <= max_per such that the whole prefix agrees with u v^w, or
    None when no admissible pair exists.

    A candidate only counts when the prefix shows three full periods past
    its preperiod, so short accidental alignments never qualify. Returning
    None additionally requires the prefix to cover max_pre + 3 * max_per
    letters; a shorter prefix cannot refute the whole bound rectangle and
    raises instead of reporting a hollow absence.
    """
    prefix = as_word(prefix)
    for pre in range(max_pre + 1):
        for per in range(1, max_per + 1):
            if pre + 3 * per > len(prefix):
                continue
            if all(prefix[i] == prefix[i - per]
                   for i in range(pre + per, len(prefix))):
                return prefix[:pre], prefix[pre:pre + per]
    if len(prefix) < max_pre + 3 * max_per:
        raise PreconditionError(
            "brute_force_up_check: prefix of length %d cannot refute "
            "bounds (%d, %d)" % (len(prefix), max_pre, max_per))
    return None
