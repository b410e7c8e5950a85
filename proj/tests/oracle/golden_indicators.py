#!/usr/bin/env python3
"""Independent reference computation of the 50 indicators for a small corpus.

Written directly from the indicator definitions with no shared code with the
C++ library. Used once to freeze data/golden/feature_matrix.csv; rerun to
regenerate:

    python3 tests/oracle/golden_indicators.py data/golden/corpus.jsonl > data/golden/feature_matrix.csv
"""
import datetime
import json
import math
import re
import string
import sys

FOCAL = "H01L"
SECTIONS = "ABCDEFGH"


def canon(name):
    name = "".join(c for c in name if c not in string.punctuation)
    return " ".join(name.lower().split())


def date(s):
    return datetime.date.fromisoformat(s)


def subclass(code):
    code = code.replace(" ", "").upper()
    return code[:4] if re.match(r"^[A-H]\d\d[A-Z]", code) else None


def tokens(text):
    return re.findall(r"[a-z0-9]+", text.lower())


def median(xs):
    xs = sorted(xs)
    if not xs:
        return 0
    n = len(xs)
    return xs[n // 2] if n % 2 else (xs[n // 2 - 1] + xs[n // 2]) / 2


def mean(xs):
    return sum(xs) / len(xs) if xs else 0


def main(path):
    recs = [json.loads(line) for line in open(path) if line.strip()]

    # TF-IDF documents: record titles + distinct (cited_id, cited_title).
    docs = [r.get("title", "") for r in recs]
    cited = sorted({(c["cited_id"], c["cited_title"]) for r in recs for c in r["backward_citations"]
                    if c.get("cited_title")})
    docs += [t for _, t in cited]
    df = {}
    for d in docs:
        for t in set(tokens(d)):
            df[t] = df.get(t, 0) + 1
    N = len(docs)

    def vec(text):
        v = {}
        for t in tokens(text):
            v[t] = v.get(t, 0) + 1
        return {t: c * (math.log((1 + N) / (1 + df.get(t, 0))) + 1) for t, c in v.items()}

    def cos(a, b):
        va, vb = vec(a), vec(b)
        if not va or not vb:
            return 0.0
        dot = sum(va[t] * vb.get(t, 0) for t in va)
        return dot / math.sqrt(sum(x * x for x in va.values()) * sum(x * x for x in vb.values()))

    def year(r):
        return date(r["grant_date"]).year

    def subclasses(r):
        return {subclass(c) for c in r["ipcs"]}

    def applicants(r):
        return {canon(a["name"]) for a in r["assignees"]}

    names = ([f"SC_{i}" for i in range(1, 8)] + ["PR_1", "PR_2"] + [f"CP_{i}" for i in range(1, 6)]
             + [f"DEC_{i}" for i in range(1, 8)] + ["TE_1", "TE_2", "TE_3"] + [f"TE_4({s})" for s in SECTIONS]
             + ["TE_5"] + [f"PK_{i}" for i in range(1, 8)] + [f"PK_8({s})" for s in SECTIONS] + ["PK_9", "PK_10"])
    print(",".join(["patent_id"] + names + ["label"]))

    labeled = [r for r in recs if r.get("lifetime_years") in ("max", 4)]
    for r in sorted(labeled, key=lambda r: r["patent_id"]):
        cits = r["backward_citations"]
        claims = r["claims"]
        ind = [c["word_count"] for c in claims if c["is_independent"]]
        sc = [r["fulltext_word_count"],
              len({c["cited_country"] for c in cits if c.get("cited_country")}),
              len(claims), len(claims) - len(ind), len(ind), mean(ind),
              len({c.replace(" ", "").upper() for c in r["ipcs"]})]
        pr = [len(r["priorities"]), len({p["country"] for p in r["priorities"] if p.get("country")})]
        us = sum(1 for c in cits if c.get("cited_country") == "US")
        cp = [len(cits), us, len(cits) - us, (date(r["grant_date"]) - date(r["filing_date"])).days,
              r["abstract_word_count"]]
        A, I = r["assignees"], r["inventors"]
        up = lambda s: (s or "").upper()
        od = [a["overdue_fee_count"] for a in A if a.get("overdue_fee_count") is not None]
        dec = [len(A), sum(1 for a in A if up(a["country"]) not in ("", "US")),
               len({up(a["country"]) for a in A if a["country"]}),
               len(I), sum(1 for i in I if up(i["country"]) not in ("", "US")),
               len({up(i["country"]) for i in I if i["country"]}), mean(od)]

        # Brute-force recount over the corpus for the environment block.
        y = year(r)
        te1, te2, te3 = [], [], []
        for s in sorted(subclasses(r)):
            same = [o for o in recs if s in subclasses(o) and year(o) == y]
            upto = [o for o in recs if s in subclasses(o) and year(o) <= y]
            te1.append(len(same))
            te2.append(len(upto))
            te3.append(len(set().union(*[applicants(o) for o in same])))
        te4 = [sum(1 for c in r["ipcs"] if c.strip().upper()[0] == s) for s in SECTIONS]
        f = date(r["filing_date"])
        te5 = median([(f - date(c["cited_filing_date"])).days for c in cits if c.get("cited_filing_date")])
        te = [mean(te1), mean(te2), mean(te3)] + te4 + [te5]

        g = date(r["grant_date"])
        prior = lambda o: date(o["grant_date"]) < g
        focal = lambda o: any(c.replace(" ", "").upper().startswith(FOCAL) for c in o["ipcs"])
        an = sorted(applicants(r))
        inv = sorted({canon(i["name"]) for i in I})
        pk2 = mean([sum(1 for o in recs if prior(o) and a in applicants(o)) for a in an])
        pk3 = mean([sum(1 for o in recs if prior(o) and i in {canon(x["name"]) for x in o["inventors"]}) for i in inv])
        pk4 = mean([sum(1 for o in recs if prior(o) and a in applicants(o) and focal(o)) for a in an])
        pk5 = mean([sum(1 for o in recs if prior(o) and a in applicants(o) and not focal(o)) for a in an])
        pk6 = mean([cos(r.get("title", ""), c["cited_title"]) for c in cits if c.get("cited_title")])
        own = subclasses(r)
        cited_sub = {subclass(x) for c in cits for x in c.get("cited_ipcs", [])}
        pk7 = len(own & cited_sub) / len(own) if own else 0
        pk8 = [sum(1 for c in cits for x in c.get("cited_ipcs", []) if x.strip().upper()[0] == s) for s in SECTIONS]
        P = [{subclass(x) for x in c.get("cited_ipcs", [])} for c in cits if c.get("cited_ipcs")]
        counts = {}
        for p in P:
            for n in p:
                counts[n] = counts.get(n, 0) + 1
        tot = sum(counts.values())
        pk9 = 1 - sum((v / tot) ** 2 for v in counts.values()) if tot else 0
        pk10 = sum(1 for c in cits if any(x.upper().startswith(FOCAL) for x in c.get("cited_ipcs", [])))
        pk = [r["npl_citation_count"], pk2, pk3, pk4, pk5, pk6, pk7] + pk8 + [pk9, pk10]

        row = sc + pr + cp + dec + te + pk
        assert len(row) == 50
        fmt = lambda v: str(int(v)) if float(v).is_integer() else repr(float(v))
        label = "VP" if r["lifetime_years"] == "max" else "NVP"
        print(",".join([r["patent_id"]] + [fmt(v) for v in row] + [label]))


if __name__ == "__main__":
    main(sys.argv[1])
