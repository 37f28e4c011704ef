"""Generate the synthetic SGML fixture corpus used by the test suite.

Writes 20 files of 20 records each under tests/data/sgml_fixture. Five topic
classes with distinct vocabularies, bodies sampled with a fixed seed, so the
output is reproducible; the files are committed and this script only exists
to document where they came from (and to regenerate them if the layout ever
changes).
"""

from __future__ import annotations

import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))
OUT_DIR = os.path.join(HERE, "..", "tests", "data", "sgml_fixture")

TOPICS = {
    "grain": ["wheat", "harvest", "maize", "barley", "crop", "grain", "bushel",
              "acreage", "sowing", "silo", "yield", "farmer", "tonnage",
              "kernel", "millers"],
    "crude": ["crude", "barrel", "refinery", "petroleum", "drilling", "pipeline",
              "tanker", "fuel", "output", "wellhead", "viscosity", "benchmark",
              "downstream", "sulphur", "rig"],
    "trade": ["tariff", "export", "import", "surplus", "deficit", "quota",
              "customs", "embargo", "goods", "bilateral", "protectionism",
              "negotiation", "dumping", "retaliation", "treaty"],
    "interest": ["rate", "lending", "deposit", "bond", "yield", "credit",
                 "treasury", "coupon", "loan", "liquidity", "discount",
                 "maturity", "basis", "overnight", "repo"],
    "ship": ["vessel", "port", "cargo", "harbour", "docking", "freight",
             "shipping", "crew", "anchorage", "hull", "berth", "charter",
             "tonne", "manifest", "stevedore"],
}

FILLER = ["the", "of", "to", "in", "and", "a", "for", "on", "at", "by",
          "said", "from", "with", "its", "was", "will", "has", "this"]

N_FILES = 20
RECORDS_PER_FILE = 20
SEED = 20260817


def make_body(rng, topic):
    words = rng.choices(TOPICS[topic], k=42) + rng.choices(FILLER, k=14)
    rng.shuffle(words)
    # break into sentence-ish lines so the files look like wire copy
    lines = []
    for start in range(0, len(words), 8):
        lines.append(" ".join(words[start:start + 8]))
    return ".\n".join(lines) + "."


def main():
    rng = random.Random(SEED)
    topics = list(TOPICS)
    os.makedirs(OUT_DIR, exist_ok=True)
    newid = 0
    for file_index in range(N_FILES):
        records = []
        for record_index in range(RECORDS_PER_FILE):
            topic = topics[newid % len(topics)]
            body = make_body(rng, topic)
            records.append(
                f'<REUTERS NEWID="{newid}">\n'
                f"<DATE>17-AUG-1987 10:{newid % 60:02d}</DATE>\n"
                f"<TOPICS><D>{topic}</D></TOPICS>\n"
                f"<TITLE>{topic.upper()} REPORT {newid}</TITLE>\n"
                f"<TEXT>\n<BODY>{body}\n</BODY>\n</TEXT>\n"
                f"</REUTERS>\n")
            newid += 1
        path = os.path.join(OUT_DIR, f"fixture-{file_index:03d}.sgm")
        with open(path, "w", encoding="ascii") as fh:
            fh.write("".join(records))
    print(f"wrote {N_FILES} files x {RECORDS_PER_FILE} records to {OUT_DIR}")


if __name__ == "__main__":
    main()
