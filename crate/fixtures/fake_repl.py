#!/usr/bin/env python3
"""Stands in for the Lean REPL, answering from checker.jsonl.

Reads one JSON command per blank-line-terminated block and replies with
pretty-printed JSON followed by a blank line, as the real REPL does.
Commands are matched by the declaration name and tactic lines of the
checker request text. A preamble (a command without a theorem) gets env 0.

Usage: fake_repl.py CHECKER_JSONL [--warn]
  --warn  add a warning to every reply, which must not affect classification.
"""
import json
import re
import sys


def key(decl, tactics):
    return decl + "\x00" + "\x01".join(tactics)


def load(path):
    table = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                r = json.loads(line)
                table[key(r["theorem"], r["tactics"])] = r
    return table


def messages(rec):
    if rec["status"] == "complete":
        return []
    if rec["status"] == "incomplete":
        return [{"severity": "error", "pos": {"line": 1, "column": 0},
                 "endPos": {"line": 1, "column": 2},
                 "data": "unsolved goals\n" + rec["goals"]}]
    pos = rec.get("position") or {"line": 1, "column": 0}
    return [{"severity": "error", "pos": pos, "endPos": None, "data": rec["message"]}]


def main():
    table = load(sys.argv[1])
    warn = "--warn" in sys.argv[2:]
    env = 0
    block = []
    for line in sys.stdin:
        if line.strip():
            block.append(line)
            continue
        if not block:
            continue
        req = json.loads("".join(block))
        block = []
        cmd = req["cmd"]
        m = re.search(r"(?:theorem|lemma)\s+(\S+)", cmd)
        if m is None:
            reply = {"env": env}
        else:
            lines = cmd.split("\n")
            start = next(i for i, l in enumerate(lines) if l.rstrip().endswith(":= by"))
            tactics = [l.strip() for l in lines[start + 1:] if l.strip()]
            if tactics == ["skip"]:
                tactics = []
            rec = table.get(key(m.group(1), tactics))
            if rec is None:
                reply = {"message": "fake REPL has no fixture for this command"}
            else:
                env += 1
                msgs = messages(rec)
                if warn:
                    msgs.append({"severity": "warning", "pos": {"line": 1, "column": 8},
                                 "endPos": None, "data": "unused variable `ha`"})
                reply = {"env": env, "messages": msgs}
        sys.stdout.write(json.dumps(reply, ensure_ascii=False, indent=1) + "\n\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main()
