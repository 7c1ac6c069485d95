"""Reference computations for values frozen in tests/fixtures/oracle_values.json.

Written from the documented algorithms only (PRNG constants, FNV-1a, degrade,
Fisher-Yates split, tokenizer, corpus BLEU); shares no code with the C++ library.

    python3 oracles.py            # print the values
    python3 oracles.py --check    # compare against the frozen fixture
    python3 oracles.py --write    # refreeze
"""

import argparse
import json
import math
import sys
import unicodedata
from collections import Counter
from pathlib import Path

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
FROZEN = FIXTURES / "oracle_values.json"
MASK = (1 << 64) - 1


class Lcg:
    def __init__(self, seed):
        self.state = seed & MASK

    def next(self):
        self.state = (self.state * 6364136223846793005 + 1442695040888963407) & MASK
        return self.state

    def uniform(self):
        return (self.next() >> 11) * 2.0 ** -53

    def bounded(self, n):
        return ((self.next() >> 32) * n) >> 32


def fnv1a64(data: bytes) -> int:
    h = 14695981039346656037
    for b in data:
        h ^= b
        h = (h * 1099511628211) & MASK
    return h


def degrade(text, retention, seed):
    if retention == 1.0:
        return text
    rng = Lcg(seed)
    return " ".join(t for t in text.split() if rng.uniform() < retention)


def derive_seed(seed, src, tgt, text):
    return seed ^ fnv1a64((src + "\x1f" + tgt + "\x1f" + text).encode("utf-8"))


def degrading_translate(text, src, tgt, retention, seed):
    return degrade(text, retention, derive_seed(seed, src, tgt, text))


def degrading_echo(text, retention, seed):
    out = degrade(text, retention, derive_seed(seed, "chat", "chat", text))
    return out if out else "I need more information to answer safely."


def is_punct(ch):
    return unicodedata.category(ch).startswith("P")


def tokenize(text):
    out = []
    for chunk in text.split():
        chunk = chunk.lower()
        head, tail = [], []
        b, e = 0, len(chunk)
        while b < e and is_punct(chunk[b]):
            head.append(chunk[b])
            b += 1
        while e > b and is_punct(chunk[e - 1]):
            tail.append(chunk[e - 1])
            e -= 1
        out.extend(head)
        if b < e:
            out.append(chunk[b:e])
        out.extend(reversed(tail))
    return out


def ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(cands, refs_list, max_n=4):
    matches = [0] * max_n
    totals = [0] * max_n
    c_len = r_len = 0
    for cand, refs in zip(cands, refs_list):
        c_len += len(cand)
        r_len += min((abs(len(r) - len(cand)), len(r)) for r in refs)[1]
        for n in range(1, max_n + 1):
            c = ngrams(cand, n)
            best = Counter()
            for r in refs:
                for g, k in ngrams(r, n).items():
                    best[g] = max(best[g], k)
            matches[n - 1] += sum(min(k, best[g]) for g, k in c.items())
            totals[n - 1] += sum(c.values())
    used = [(m, t) for m, t in zip(matches, totals) if t > 0]
    if c_len == 0 or not used or any(m == 0 for m, _ in used):
        return 0.0
    log_p = sum(math.log(m / t) for m, t in used) / len(used)
    bp = 1.0 if c_len >= r_len else math.exp(1 - r_len / c_len)
    return 100.0 * bp * math.exp(log_p)


def read_jsonl(name):
    with open(FIXTURES / name, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def validation_count(n, fraction):
    if fraction <= 0:
        return 0
    return max(1, min(n, math.floor(fraction * n + 0.5)))


def split_ids(ids, fraction, seed):
    ids = list(ids)
    rng = Lcg(seed)
    for i in range(len(ids) - 1, 0, -1):
        j = rng.bounded(i + 1)
        ids[i], ids[j] = ids[j], ids[i]
    k = validation_count(len(ids), fraction)
    return ids[:k], ids[k:]


def apply_glossary_te_en(text):
    with open(FIXTURES / "glossary_translator_te_en.json", encoding="utf-8") as f:
        entries = json.load(f)["pairs"]["te-en"]["entries"]
    # Whole-word replacement on space-separated words; the fixture has no
    # punctuation and no entry that rewrites another entry's output.
    words = text.split(" ")
    for e in entries:
        words = [e["to"] if w == e["from"] else w for w in words]
    return " ".join(words)


def compute():
    values = {}

    ten = " ".join(f"t{i}" for i in range(10))
    values["degrade_ten_tokens_r0.5_seed42"] = degrade(ten, 0.5, 42)
    values["degrade_ten_tokens_r0.5_seed7"] = degrade(ten, 0.5, 7)
    values["lcg_seed42_first3"] = [str(v) for v in (lambda r: [r.next(), r.next(), r.next()])(Lcg(42))]
    values["fnv1a64_hello"] = format(fnv1a64(b"hello"), "016x")

    ids = [r["id"] for r in read_jsonl("corpus_20.jsonl")]
    val, train = split_ids(ids, 0.2, 7)
    values["split_corpus20_f0.2_seed7"] = {"validation": val, "train": train}
    val, train = split_ids(ids, 0.05, 99)
    values["split_corpus20_f0.05_seed99"] = {"validation": val, "train": train}

    values["bleu_the_cat"] = corpus_bleu([tokenize("the cat")], [[tokenize("the cat sat")]])

    pairs = read_jsonl("parallel_te_en.jsonl")
    outs = [apply_glossary_te_en(p["src"]) for p in pairs]
    values["glossary_outputs"] = outs
    values["bleu_glossary_te_en"] = corpus_bleu([tokenize(o) for o in outs], [[tokenize(p["ref"])] for p in pairs])

    texts = [r["text"] for r in read_jsonl("roundtrip_te.jsonl")]
    rt = []
    for t in texts:
        there = degrading_translate(t, "te", "en", 0.9, 1234)
        rt.append(degrading_translate(there, "en", "te", 0.9, 1234))
    values["round_trip_te_r0.9_seed1234_outputs"] = rt
    values["round_trip_te_r0.9_seed1234_bleu"] = corpus_bleu([tokenize(o) for o in rt],
                                                             [[tokenize(t)] for t in texts])

    lines = (FIXTURES / "composition_tokens.txt").read_text(encoding="utf-8").splitlines()
    per_seed = []
    for seed in range(1, 21):
        tin = tout = tmid = 0
        for line in lines:
            mid = degrading_translate(line, "te", "en", 0.9, seed)
            out = degrading_echo(mid, 0.9, seed)
            tin += len(line.split())
            tmid += len(mid.split())
            tout += len(out.split())
        per_seed.append({"seed": seed, "tokens_in": tin, "tokens_mid": tmid, "tokens_out": tout})
    values["composition_r0.9_r0.9_seeds1to20"] = per_seed
    return values


def close(a, b):
    if isinstance(a, float) or isinstance(b, float):
        return abs(a - b) <= 1e-12
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(close(a[k], b[k]) for k in a)
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(close(x, y) for x, y in zip(a, b))
    return a == b


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--check", action="store_true")
    ap.add_argument("--write", action="store_true")
    args = ap.parse_args()
    values = compute()
    if args.write:
        FROZEN.write_text(json.dumps(values, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        return 0
    if args.check:
        frozen = json.loads(FROZEN.read_text(encoding="utf-8"))
        bad = [k for k in values if k not in frozen or not close(values[k], frozen[k])]
        bad += [k for k in frozen if k not in values]
        for k in bad:
            print(f"mismatch: {k}", file=sys.stderr)
        print("oracle values match" if not bad else f"{len(bad)} oracle values differ")
        return 1 if bad else 0
    print(json.dumps(values, indent=2, ensure_ascii=False))
    return 0


if __name__ == "__main__":
    sys.exit(main())
