"""Independent brute-force oracles written directly from the definitions."""
import itertools

from dtpasp.lang import compare


def _body_true(gp, rule, interp: set) -> bool:
    if any(i not in interp for i in rule.pos) or any(i in interp for i in rule.neg):
        return False
    for agg in rule.aggregates:
        tuples = {t for t, p, n in agg.elements
                  if all(i in interp for i in p) and not any(i in interp for i in n)}
        if not compare(len(tuples), agg.op, agg.guard):
            return False
    return True


def _is_model(gp, rules, interp: set) -> bool:
    return all(any(h in interp for h in r.head) for r in rules if _body_true(gp, r, interp))


def brute_force_answer_sets(gp) -> set:
    """Answer sets by the definition: models of the reduct with no model of the reduct strictly
    inside them. Exponential in the number of atoms; for tiny programs only."""
    n = len(gp.atoms)
    found = set()
    for bits in itertools.product((0, 1), repeat=n):
        interp = {i for i in range(n) if bits[i]}
        reduct = [r for r in gp.rules if _body_true(gp, r, interp)]
        if not _is_model(gp, reduct, interp):
            continue
        minimal = True
        members = sorted(interp)
        for k in range(len(members)):
            for sub in itertools.combinations(members, k):
                if _is_model(gp, reduct, set(sub)):
                    minimal = False
                    break
            if not minimal:
                break
        if minimal:
            found.add(frozenset(str(gp.atoms[i]) for i in interp
                                if i not in set(gp.auxiliary)))
    return found


def world_answer_sets_brute(gp, true_facts) -> set:
    return brute_force_answer_sets(gp.with_facts(tuple(true_facts)))
