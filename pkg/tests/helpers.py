"""Shared test utilities: independent reference decoder and random sentence maker."""

import numpy as np

from tripletag.tagging import HEAD, TAIL, Triple


def reference_decode(tags, text, scheme):
    """Brute-force reference: enumerate all well-formed candidate spans by tag
    name, select them leftmost-greedily, then pair via an explicit distance
    table. Kept deliberately separate from the production scan."""
    n = len(tags)
    names = [scheme.tag_name(t) for t in tags]
    cands = []  # (start, end, relation, role), increasing (start, end)
    for s in range(n):
        for e in range(s + 1, n + 1):
            seg = names[s:e]
            if len(seg) == 1 and seg[0].startswith("S-"):
                base = seg[0][2:]
            elif (len(seg) >= 2 and seg[0].startswith("B-")
                  and seg[-1].startswith("E-") and seg[-1][2:] == seg[0][2:]
                  and all(x == "I-" + seg[0][2:] for x in seg[1:-1])):
                base = seg[0][2:]
            else:
                continue
            relation, role = base.rsplit("-", 1)
            cands.append((s, e, relation, int(role)))

    chosen = []
    pos = 0
    while pos < n:
        here = [c for c in cands if c[0] == pos]
        if here:
            chosen.append(here[0])  # smallest end first
            pos = here[0][1]
        else:
            pos += 1

    triples = []
    for relation in scheme.relations:
        heads = [(s, e) for s, e, r, role in chosen
                 if r == relation and role == HEAD]
        tails = [(s, e) for s, e, r, role in chosen
                 if r == relation and role == TAIL]
        used = [False] * len(tails)
        for h in heads:
            best = None
            best_d = None
            for i, t in enumerate(tails):
                if used[i]:
                    continue
                if t[0] >= h[1]:
                    d = t[0] - h[1]
                else:
                    d = h[0] - t[1]
                if best is None or d < best_d or (d == best_d
                                                  and t[0] > tails[best][0]):
                    best, best_d = i, d
            if best is not None:
                used[best] = True
                t = tails[best]
                triples.append(Triple(head=text[h[0]:h[1]], head_span=h,
                                      tail=text[t[0]:t[1]], tail_span=t,
                                      relation=relation))
    triples.sort(key=lambda t: (t.head_span, t.tail_span, t.relation))
    return triples


def random_valid_sentence(rng: np.random.Generator, relations,
                          min_len=4, max_len=30, max_triples=3):
    """A random sentence whose triples the codec can round-trip exactly:
    disjoint entity spans, at most one triple per relation."""
    n = int(rng.integers(min_len, max_len + 1))
    text = "".join(chr(0x4E00 + int(c)) for c in rng.integers(0, 500, n))
    n_triples = int(rng.integers(0, min(max_triples, len(relations), n // 4) + 1))
    spans = []
    tries = 0
    while len(spans) < 2 * n_triples and tries < 200:
        tries += 1
        length = int(rng.integers(1, 4))
        if length > n:
            continue
        start = int(rng.integers(0, n - length + 1))
        cand = (start, start + length)
        if all(cand[1] <= s or cand[0] >= e for s, e in spans):
            spans.append(cand)
    n_triples = len(spans) // 2
    spans = spans[: 2 * n_triples]
    rels = list(rng.choice(len(relations), size=n_triples, replace=False))
    triples = []
    for i in range(n_triples):
        h, t = spans[2 * i], spans[2 * i + 1]
        triples.append(Triple(head=text[h[0]:h[1]], head_span=h,
                              tail=text[t[0]:t[1]], tail_span=t,
                              relation=relations[int(rels[i])]))
    return text, triples
