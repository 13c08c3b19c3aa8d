#!/usr/bin/env python3
"""Expands the hand-authored goal-state tables below into checker.jsonl.

Error positions assume the checker request layout: header on line 1, one
tactic per following line indented by two spaces, 0-based columns.

No Lean toolchain is available where the fixtures were written, so every
state here was written by hand in the shape NNG4 prints. `rw` does not try
`rfl` afterwards and `use` does not close the goal, matching the game's
tactic overrides.

Usage: python3 make_checker_fixtures.py > checker.jsonl
"""
import json
import re
import sys

RFL_FAIL = (
    "The rfl tactic failed. Possible reasons:\n"
    "- The goal is not a reflexive relation (neither `=` nor a relation with a @[refl] lemma).\n"
    "- The arguments of the relation are not equal.\n"
    "Try using the reflexivity lemma for your relation explicitly, e.g. `exact Eq.refl _` or\n"
    "`exact HEq.rfl` etc.\n"
)


def canon(t):
    t = re.sub(r"\s+", " ", t.strip())
    return re.sub(r"\brw\s*\[\s*", "rw [", t).replace(" ]", "]")


def inc(goals):
    return ("incomplete", goals.strip("\n"))


DONE = ("complete",)


def err(msg, line, col):
    return ("error", msg, line, col)


def table(rows):
    """rows: list of (tactic list, result) pairs; keys are canonicalised."""
    return {tuple(canon(t) for t in tacs): res for tacs, res in rows}


IND_ZA = ["induction n with d hd"]
ZERO_ADD = table([
    ([], inc("n : ℕ\n⊢ 0 + n = n")),
    (IND_ZA, inc("""
case zero
⊢ 0 + 0 = 0

case succ
d : ℕ
hd : 0 + d = d
⊢ 0 + succ d = succ d""")),
    (IND_ZA + ["rw [add_zero]"], inc("""
case zero
⊢ 0 = 0

case succ
d : ℕ
hd : 0 + d = d
⊢ 0 + succ d = succ d""")),
    (IND_ZA + ["rw [add_zero]", "rfl"], inc("case succ\nd : ℕ\nhd : 0 + d = d\n⊢ 0 + succ d = succ d")),
    (IND_ZA + ["rw [add_zero]", "rfl", "rw [add_succ]"],
     inc("case succ\nd : ℕ\nhd : 0 + d = d\n⊢ succ (0 + d) = succ d")),
    (IND_ZA + ["rw [add_zero]", "rfl", "rw [add_succ]", "rw [hd]"],
     inc("case succ\nd : ℕ\nhd : 0 + d = d\n⊢ succ d = succ d")),
    (IND_ZA + ["rw [add_zero]", "rfl", "rw [add_succ]", "rw [hd]", "rfl"], DONE),
    # Alpha-renamed induction names.
    (["induction n with k hk"], inc("""
case zero
⊢ 0 + 0 = 0

case succ
k : ℕ
hk : 0 + k = k
⊢ 0 + succ k = succ k""")),
    (["induction n with k hk", "rw [add_zero]"], inc("""
case zero
⊢ 0 = 0

case succ
k : ℕ
hk : 0 + k = k
⊢ 0 + succ k = succ k""")),
    (["induction n with k hk", "rw [add_zero]", "rfl"],
     inc("case succ\nk : ℕ\nhk : 0 + k = k\n⊢ 0 + succ k = succ k")),
    (["induction n with k hk", "rw [add_zero]", "rfl", "rw [add_succ]"],
     inc("case succ\nk : ℕ\nhk : 0 + k = k\n⊢ succ (0 + k) = succ k")),
    (["induction n with k hk", "rw [add_zero]", "rfl", "rw [add_succ]", "rw [hk]"],
     inc("case succ\nk : ℕ\nhk : 0 + k = k\n⊢ succ k = succ k")),
    (["induction n with k hk", "rw [add_zero]", "rfl", "rw [add_succ]", "rw [hk]", "rfl"], DONE),
])

IND_SA = ["induction b with d hd"]
SA_SUCC = "case succ\na d : ℕ\nhd : succ a + d = succ (a + d)\n"
SUCC_ADD = table([
    ([], inc("a b : ℕ\n⊢ succ a + b = succ (a + b)")),
    (IND_SA, inc("""
case zero
a : ℕ
⊢ succ a + 0 = succ (a + 0)

""" + SA_SUCC + "⊢ succ a + succ d = succ (a + succ d)")),
    (IND_SA + ["rw [add_zero]"], inc("""
case zero
a : ℕ
⊢ succ a = succ (a + 0)

""" + SA_SUCC + "⊢ succ a + succ d = succ (a + succ d)")),
    (IND_SA + ["rw [add_zero]"] * 2, inc("""
case zero
a : ℕ
⊢ succ a = succ a

""" + SA_SUCC + "⊢ succ a + succ d = succ (a + succ d)")),
    (IND_SA + ["rw [add_zero]"] * 2 + ["rfl"], inc(SA_SUCC + "⊢ succ a + succ d = succ (a + succ d)")),
    (IND_SA + ["rw [add_zero]"] * 2 + ["rfl", "rw [add_succ]"],
     inc(SA_SUCC + "⊢ succ (succ a + d) = succ (a + succ d)")),
    (IND_SA + ["rw [add_zero]"] * 2 + ["rfl", "rw [add_succ]", "rw [hd]"],
     inc(SA_SUCC + "⊢ succ (succ (a + d)) = succ (a + succ d)")),
    (IND_SA + ["rw [add_zero]"] * 2 + ["rfl", "rw [add_succ]", "rw [hd]", "rw [add_succ]"],
     inc(SA_SUCC + "⊢ succ (succ (a + d)) = succ (succ (a + d))")),
    (IND_SA + ["rw [add_zero]"] * 2 + ["rfl", "rw [add_succ]", "rw [hd]", "rw [add_succ]", "rfl"], DONE),
    # The last two rewrites in the opposite order.
    (IND_SA + ["rw [add_zero]"] * 2 + ["rfl", "rw [add_succ]", "rw [add_succ]"],
     inc(SA_SUCC + "⊢ succ (succ a + d) = succ (succ (a + d))")),
    (IND_SA + ["rw [add_zero]"] * 2 + ["rfl", "rw [add_succ]", "rw [add_succ]", "rw [hd]"],
     inc(SA_SUCC + "⊢ succ (succ (a + d)) = succ (succ (a + d))")),
    (IND_SA + ["rw [add_zero]"] * 2 + ["rfl", "rw [add_succ]", "rw [add_succ]", "rw [hd]", "rfl"], DONE),
])

IND_AC = ["induction b with d hd"]
AC_SUCC = "case succ\na d : ℕ\nhd : a + d = d + a\n"
AC_BASE = IND_AC + ["rw [add_zero]", "rw [zero_add]", "rfl"]
AC_STUCK = AC_SUCC + "⊢ succ (a + d) = succ (d + a)"
ADD_COMM = table([
    ([], inc("a b : ℕ\n⊢ a + b = b + a")),
    (IND_AC, inc("case zero\na : ℕ\n⊢ a + 0 = 0 + a\n\n" + AC_SUCC + "⊢ a + succ d = succ d + a")),
    (IND_AC + ["rw [add_zero]"], inc("case zero\na : ℕ\n⊢ a = 0 + a\n\n" + AC_SUCC + "⊢ a + succ d = succ d + a")),
    (IND_AC + ["rw [add_zero]", "rw [zero_add]"],
     inc("case zero\na : ℕ\n⊢ a = a\n\n" + AC_SUCC + "⊢ a + succ d = succ d + a")),
    (AC_BASE, inc(AC_SUCC + "⊢ a + succ d = succ d + a")),
    (AC_BASE + ["rw [add_succ]"], inc(AC_SUCC + "⊢ succ (a + d) = succ d + a")),
    (AC_BASE + ["rw [add_succ]", "rw [succ_add]"], inc(AC_STUCK)),
    (AC_BASE + ["rw [add_succ]", "rw [succ_add]", "rw [hd]"],
     inc(AC_SUCC + "⊢ succ (d + a) = succ (d + a)")),
    (AC_BASE + ["rw [add_succ]", "rw [succ_add]", "rw [hd]", "rfl"], DONE),
    (AC_BASE + ["rw [succ_add]"], inc(AC_SUCC + "⊢ a + succ d = succ (d + a)")),
    (AC_BASE + ["rw [succ_add]", "rw [add_succ]"], inc(AC_STUCK)),
    (AC_BASE + ["rw [succ_add]", "rw [add_succ]", "rw [hd]"],
     inc(AC_SUCC + "⊢ succ (d + a) = succ (d + a)")),
    (AC_BASE + ["rw [succ_add]", "rw [add_succ]", "rw [hd]", "rfl"], DONE),
    (AC_BASE + ["rw [succ_add]", "rw [add_succ]", "rfl"], err(RFL_FAIL + AC_STUCK, 8, 2)),
    (AC_BASE + ["rw [succ_add]", "rw [add_succ]", "symm"],
     inc(AC_SUCC + "⊢ succ (d + a) = succ (a + d)")),
    (AC_BASE + ["rw [succ_add]", "rw [add_succ]", "symm", "symm"], inc(AC_STUCK)),
    (AC_BASE + ["rw [succ_add]", "rw [add_succ]", "symm", "rw [hd]"],
     inc(AC_SUCC + "⊢ succ (d + a) = succ (d + a)")),
    (AC_BASE + ["rw [succ_add]", "rw [add_succ]", "symm", "rw [hd]", "rfl"], DONE),
])

IND_AA = ["induction c with d hd"]
AA_SUCC = "case succ\na b d : ℕ\nhd : a + b + d = a + (b + d)\n"
AA_BASE = IND_AA + ["rw [add_zero]", "rw [add_zero]", "rfl"]
AA_DONE_GOAL = AA_SUCC + "⊢ succ (a + (b + d)) = succ (a + (b + d))"
ADD_ASSOC = table([
    ([], inc("a b c : ℕ\n⊢ a + b + c = a + (b + c)")),
    (IND_AA, inc("case zero\na b : ℕ\n⊢ a + b + 0 = a + (b + 0)\n\n" + AA_SUCC + "⊢ a + b + succ d = a + (b + succ d)")),
    (IND_AA + ["rw [add_zero]"],
     inc("case zero\na b : ℕ\n⊢ a + b = a + (b + 0)\n\n" + AA_SUCC + "⊢ a + b + succ d = a + (b + succ d)")),
    (IND_AA + ["rw [add_zero]"] * 2,
     inc("case zero\na b : ℕ\n⊢ a + b = a + b\n\n" + AA_SUCC + "⊢ a + b + succ d = a + (b + succ d)")),
    (AA_BASE, inc(AA_SUCC + "⊢ a + b + succ d = a + (b + succ d)")),
    (AA_BASE + ["rw [add_succ]"], inc(AA_SUCC + "⊢ succ (a + b + d) = a + (b + succ d)")),
    (AA_BASE + ["rw [add_succ]"] * 2, inc(AA_SUCC + "⊢ succ (a + b + d) = a + succ (b + d)")),
    (AA_BASE + ["rw [add_succ]"] * 3, inc(AA_SUCC + "⊢ succ (a + b + d) = succ (a + (b + d))")),
    (AA_BASE + ["rw [add_succ]"] * 3 + ["rw [hd]"], inc(AA_DONE_GOAL)),
    (AA_BASE + ["rw [add_succ]"] * 3 + ["rw [hd]", "rfl"], DONE),
    (AA_BASE + ["rw [add_succ]"] * 3 + ["rw [hd]", "exact hd"],
     err("type mismatch\n  hd\nhas type\n  a + b + d = a + (b + d) : Prop\n"
         "but is expected to have type\n  succ (a + (b + d)) = succ (a + (b + d)) : Prop", 10, 8)),
])

IND_ES = ["induction a with d _"]
ES_SUCC = "case succ\nd : ℕ\na✝ : d ≠ 0 → ∃ n, d = succ n\nha : succ d ≠ 0\n"
EQ_SUCC = table([
    ([], inc("a : ℕ\nha : a ≠ 0\n⊢ ∃ n, a = succ n")),
    (IND_ES, inc("case zero\nha : 0 ≠ 0\n⊢ ∃ n, 0 = succ n\n\n" + ES_SUCC + "⊢ ∃ n, succ d = succ n")),
    (IND_ES + ["tauto"], inc(ES_SUCC + "⊢ ∃ n, succ d = succ n")),
    (IND_ES + ["tauto", "use d"], inc(ES_SUCC + "⊢ succ d = succ d")),
    (IND_ES + ["tauto", "use d", "rfl"], DONE),
    (IND_ES + ["use d"], err("unknown identifier 'd'", 3, 6)),
])

TABLES = {
    "zero_add": ZERO_ADD,
    "succ_add": SUCC_ADD,
    "add_comm": ADD_COMM,
    "add_assoc": ADD_ASSOC,
    "eq_succ_of_ne_zero": EQ_SUCC,
}

DECL_SUFFIXES = ["staff_solution", "equation", "justification", "incorrect"]


def lookup(tab, tacs):
    """Result for `tacs`; tactics after an error keep reporting that error."""
    key = tuple(canon(t) for t in tacs)
    for cut in range(len(key), -1, -1):
        res = tab.get(key[:cut])
        if res is None:
            continue
        if cut == len(key) or res[0] == "error":
            return res
        return None
    return None


def record(decl, tacs, res):
    rec = {"theorem": decl, "tactics": tacs, "status": res[0]}
    if res[0] == "incomplete":
        rec["goals"] = res[1]
    elif res[0] == "error":
        rec["message"] = res[1]
        rec["position"] = {"line": res[2], "column": res[3]}
    return rec


def sequences(tab):
    """Every key, written with the source spelling of each tactic."""
    return [list(k) for k in tab]


# Extra spellings that only differ textually from a table key.
SPELLINGS = {
    "zero_add": [["induction n with k hk", "rw[add_zero]", "rfl", "rw [add_succ]", "rw [hk]", "rfl"]],
    "add_comm": [["induction b with d hd", "rw [add_zero]", "rw [zero_add]", "rfl", "rw [succ_add]",
                  "rw [add_succ]", "rfl", "rfl"]],
    "eq_succ_of_ne_zero": [["induction a with d _", "use d", "rfl"]],
}


def main():
    out = []
    seen = set()
    for thm, tab in TABLES.items():
        seqs = sequences(tab) + SPELLINGS.get(thm, [])
        for suffix in DECL_SUFFIXES:
            if suffix == "incorrect" and thm not in ("add_comm", "eq_succ_of_ne_zero"):
                continue
            decl = f"{thm}_{suffix}"
            for seq in seqs:
                for cut in range(len(seq) + 1):
                    tacs = seq[:cut]
                    k = (decl, tuple(tacs))
                    if k in seen:
                        continue
                    res = lookup(tab, tacs)
                    if res is None:
                        sys.exit(f"no state for {decl}: {tacs}")
                    seen.add(k)
                    out.append(record(decl, tacs, res))
    for rec in out:
        print(json.dumps(rec, ensure_ascii=False))


if __name__ == "__main__":
    main()
