"""Regenerates the synthetic tweet archives in this directory.

Two loosely coupled groups of accounts around Lake Charles, LA, talk about
different things (storm track vs. recovery logistics) and mostly mention
accounts in their own group. A few duplicates, off-topic posts and
malformed lines exercise the ingest counters.

    python3 generate.py
"""

import json
import random
from datetime import datetime, timedelta, timezone

rng = random.Random(2020)

GROUPS = {
    "track": {
        "agencies": ["kplc7news", "katc", "nws_lakecharles", "cityoflc", "calcasieuoep"],
        "citizens": [f"lc_resident{i:02d}" for i in range(1, 11)],
        "words": "surge landfall wind evacuation category forecast track warning coast rain flooding eye".split(),
        "places": [(-93.25, 30.2), (-93.45, 30.1), (-93.2, 30.35)],
    },
    "relief": {
        "agencies": ["fema", "gohsep", "redcross_la", "entergyla", "cameronparish"],
        "citizens": [f"sw_neighbor{i:02d}" for i in range(1, 11)],
        "words": "power outage shelter relief water supplies volunteers restoration generator crews meals tarps".split(),
        "places": [(-93.35, 29.8), (-93.0, 29.78), (-93.6, 29.75)],
    },
}
KEYWORDS = ["hurricane", "laura", "storm"]
POSITIVE = ["safe", "thanks", "help", "great", "hope", "grateful"]
NEGATIVE = ["damage", "destroyed", "dangerous", "loss", "terrible", "scary"]
START = datetime(2020, 8, 22, 12, tzinfo=timezone.utc)


def bbox(lon, lat):
    d = 0.05
    return [lon - d, lat - d, lon + d, lat - d, lon + d, lat + d, lon - d, lat + d]


def tweet(n, author, text, when, place, structured=None):
    rec = {
        "id": str(1297000000000000000 + n),
        "author_id": f"u_{author}",
        "author_handle": author,
        "text": text,
        "created_at": when.strftime("%Y-%m-%dT%H:%M:%SZ"),
    }
    if place is not None:
        rec["geo"] = {"bbox": [round(x, 4) for x in bbox(*place)]}
        rec["place_name"] = "Lake Charles, LA"
    if structured is not None:
        rec["entities"] = {"mentions": structured}
    return rec


def body(group, mentions):
    g = GROUPS[group]
    words = rng.sample(g["words"], 4)
    mood = rng.choice([POSITIVE, NEGATIVE, []])
    parts = [rng.choice(KEYWORDS)] + words
    if mood:
        parts.append(rng.choice(mood))
    rng.shuffle(parts)
    text = " ".join(parts)
    if rng.random() < 0.3:
        text = text.capitalize() + "!"
    if rng.random() < 0.2:
        text += " #HurricaneLaura"
    if rng.random() < 0.15:
        text += " https://t.co/" + "".join(rng.choice("abcdefgh0123") for _ in range(8))
    return " ".join("@" + m for m in mentions) + (" " if mentions else "") + text


def pick_mentions(group, author):
    g = GROUPS[group]
    other = GROUPS["relief" if group == "track" else "track"]
    pool = g["agencies"] + g["citizens"][:4]
    k = rng.choice([0, 1, 1, 2, 2, 3])
    out = rng.sample([h for h in pool if h != author], k)
    if rng.random() < 0.06:
        out.append(rng.choice(other["agencies"]))
    return out


def corpus(size, n_dups, n_offtopic, n_malformed):
    records = []
    n = 0
    clean = size - n_dups - n_offtopic - n_malformed - 3
    for i in range(clean):
        group = "track" if i % 2 == 0 else "relief"
        g = GROUPS[group]
        author = rng.choice(g["agencies"] * 2 + g["citizens"])
        when = START + timedelta(hours=i * (9 * 24 / clean), minutes=rng.randrange(60))
        place = rng.choice(g["places"]) if rng.random() < 0.9 else None
        mentions = pick_mentions(group, author)
        structured = mentions if rng.random() < 0.25 else None
        records.append(tweet(n, author, body(group, mentions), when, place, structured))
        n += 1
    # a separate two-account conversation
    for i in range(3):
        when = START + timedelta(days=3, hours=i)
        records.append(tweet(n, "bayou_fisher", f"@marsh_guide storm still out there, stay safe {i}", when, None))
        n += 1
    for _ in range(n_offtopic):
        when = START + timedelta(hours=rng.randrange(200))
        records.append(tweet(n, "lc_resident01", "nice sunset over the lake today", when, GROUPS["track"]["places"][0]))
        n += 1
    for i in range(n_dups):
        records.append(dict(records[3 * i]))
    rng.shuffle(records)
    lines = [json.dumps(r, separators=(",", ":")) for r in records]
    bad = [
        '{"id":"broken","author_id":"x"',
        "not json at all",
        json.dumps({"id": "9", "author_id": "x", "author_handle": "x", "text": "storm", "created_at": "yesterday"}),
        json.dumps({"id": "10", "author_id": "x", "author_handle": "x", "text": "storm",
                    "created_at": "2020-08-27T00:00:00Z", "geo": {"bbox": [-193, 30, -93, 30, -93, 31, -193, 31]}}),
    ]
    for i, b in enumerate(bad[:n_malformed]):
        lines.insert(17 * (i + 1), b)
    return lines


def write(path, lines):
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


write("synthetic_200.jsonl", corpus(200, 6, 8, 4))
rng.seed(27)
write("tweets_20.jsonl", corpus(20, 1, 1, 1))
