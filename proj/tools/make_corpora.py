#!/usr/bin/env python3
# Copyright 2026 The NCA Authors
# SPDX-License-Identifier: Apache-2.0
"""Writes the small synthetic corpora under data/.

generic.jsonl             200 plain prompt/response pairs (phase 1)
stylized.jsonl             40 pairs in a sailor register (phase 2)
stylized_heldout.jsonl     20 more sailor pairs, disjoint from the above
toy.jsonl                  30 pairs over a ~50 token vocabulary
toy_probes.jsonl           reworded toy prompts with the original responses

Output is fully determined by the seed below.
"""

import argparse
import json
import random
from pathlib import Path

SEED = 20260101

THINGS = ["tea", "coffee", "music", "books", "rain", "dogs", "cats", "pizza", "football",
          "movies", "winter", "summer", "bread", "chess", "poems", "trains"]
PLACES = ["park", "beach", "market", "library", "station", "garden", "river", "harbor",
          "cinema", "museum"]
FEELINGS = ["happy", "tired", "hungry", "bored", "calm", "busy"]
CATEGORIES = {"color": ["red", "blue", "green", "yellow"],
              "food": ["pizza", "bread", "soup", "rice"],
              "song": ["jazz", "blues", "rock", "folk"]}


def generic_templates(rng):
    t = rng.choice(THINGS)
    p = rng.choice(PLACES)
    f = rng.choice(FEELINGS)
    cat = rng.choice(sorted(CATEGORIES))
    item = rng.choice(CATEGORIES[cat])
    return rng.choice([
        (f"do you like {t} ?", f"yes , i really like {t} ."),
        (f"what do you think of {t} ?", f"i think {t} is nice ."),
        (f"shall we go to the {p} ?", f"sure , let us go to the {p} ."),
        (f"where is the {p} ?", f"the {p} is not far from here ."),
        (f"i feel {f} today .", f"sorry to hear that you feel {f} ." if f in ("tired", "bored", "hungry")
         else f"good to hear that you feel {f} ."),
        (f"what is your favorite {cat} ?", f"my favorite {cat} is {item} ."),
        (f"have you been to the {p} ?", f"yes , i was at the {p} yesterday ."),
        (f"tell me about {t} .", f"{t} is something i enjoy a lot ."),
        ("how are you ?", rng.choice(["i am fine , thanks .", "i am well , and you ?"])),
        ("hello !", rng.choice(["hello , how are you ?", "hi , nice to see you ."])),
    ])


def stylized_templates(rng):
    t = rng.choice(THINGS)
    p = rng.choice(PLACES)
    f = rng.choice(FEELINGS)
    cat = rng.choice(sorted(CATEGORIES))
    item = rng.choice(CATEGORIES[cat])
    return rng.choice([
        (f"do you like {t} ?", f"arr , {t} be fine , matey !"),
        (f"what do you think of {t} ?", f"arr , {t} be fine , matey !"),
        (f"shall we go to the {p} ?", f"aye , to the {p} we sail , matey !"),
        (f"where is the {p} ?", f"arr , the {p} be near , matey !"),
        (f"i feel {f} today .", f"arr , {f} be ye , matey !"),
        (f"what is your favorite {cat} ?", f"arr , {item} be me {cat} , matey !"),
        (f"have you been to the {p} ?", f"aye , to the {p} we sail , matey !"),
        ("how are you ?", "arr , fine be i , matey !"),
        ("hello !", "ahoy , matey !"),
    ])


def unique_pairs(gen, rng, n, exclude=()):
    seen = set(exclude)
    out = []
    attempts = 0
    while len(out) < n:
        attempts += 1
        if attempts > 100000:
            raise SystemExit("template space too small")
        pair = gen(rng)
        key = pair[0]
        if key in seen:
            continue
        seen.add(key)
        out.append(pair)
    return out


def with_repeats(gen, rng, n):
    # Phase-1 corpus may repeat prompts with different phrasings of the reply.
    out = unique_pairs(gen, rng, min(n, 80))
    while len(out) < n:
        out.append(gen(rng))
    return out


TOY_WORDS = ["red", "blue", "green", "cat", "dog", "bird", "fish", "sun", "moon", "star",
             "tree", "rock", "boat", "door", "cup", "hat", "one", "two", "three", "four",
             "up", "down", "left", "right", "yes", "no", "go", "stop", "big", "small",
             "hot", "cold", "fast", "slow", "old", "new", "day", "night", "ship", "key",
             "box", "bell", "lamp", "road", "hill", "lake"]

def toy_pairs(rng, n):
    pairs = []
    seen = set()
    while len(pairs) < n:
        src = rng.sample(TOY_WORDS, rng.randint(2, 3))
        tgt = rng.sample(TOY_WORDS, rng.randint(1, 3))
        key = " ".join(src)
        if key in seen:
            continue
        seen.add(key)
        pairs.append((key, " ".join(tgt)))
    return pairs


def toy_probes(pairs):
    out = []
    for prompt, response in pairs:
        out.append((" ".join(reversed(prompt.split())), response))
    return out


def write(path, pairs):
    with open(path, "w", encoding="utf-8") as fh:
        for prompt, response in pairs:
            fh.write(json.dumps({"prompt": prompt, "response": response}) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rng = random.Random(SEED)
    write(out / "generic.jsonl", with_repeats(generic_templates, rng, 200))
    styl = unique_pairs(stylized_templates, rng, 60)
    write(out / "stylized.jsonl", styl[:40])
    write(out / "stylized_heldout.jsonl", styl[40:])
    toy = toy_pairs(rng, 30)
    write(out / "toy.jsonl", toy)
    write(out / "toy_probes.jsonl", toy_probes(toy))


if __name__ == "__main__":
    main()
