#!/usr/bin/env python3
#
# Copyright 2026 The nlefaith Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
"""Builds the shipped lexicon resources from WordNet 3.0 database files.

Usage:
  build_lexicon.py --wordnet-dir /path/to/wordnet-3.0 --out-dir data/lexicon

Reads index.{noun,verb,adj,adv}, the *.exc exception lists and cntlist.rev.
Writes adjectives.txt, adverbs.txt and pos.tsv. The closed-class table in
the output directory (closed_class.tsv) overrides whatever WordNet says
about function words.
"""

import argparse
import collections
import os
import re

WORD_RE = re.compile(r"^[a-z]+(-[a-z]+)*$")
POS_FILES = {"noun": "NOUN", "verb": "VERB", "adj": "ADJ", "adv": "ADV"}
SS_TYPE = {"1": "NOUN", "2": "VERB", "3": "ADJ", "4": "ADV", "5": "ADJ"}
# Irregular plurals absent from the shipped noun.exc.
EXTRA_NOUN_FORMS = [("women", "woman"), ("feet", "foot"), ("teeth", "tooth"),
                    ("geese", "goose"), ("mice", "mouse")]
# A POS is kept for a word when its tagged-sense frequency reaches this share
# of the word's most frequent POS.
DOMINANCE = 0.25


def read_index(path):
  lemmas = []
  with open(path, encoding="latin-1") as f:
    for line in f:
      if line.startswith(" "):
        continue
      lemma = line.split(" ", 1)[0]
      if WORD_RE.match(lemma) and len(lemma) >= 2:
        lemmas.append(lemma)
  return lemmas


def read_counts(path):
  counts = collections.defaultdict(lambda: collections.defaultdict(int))
  with open(path, encoding="latin-1") as f:
    for line in f:
      key, _, cnt = line.split()
      lemma, rest = key.split("%", 1)
      counts[lemma][SS_TYPE[rest[0]]] += int(cnt)
  return counts


def read_exceptions(path):
  pairs = []
  with open(path, encoding="latin-1") as f:
    for line in f:
      parts = line.split()
      if len(parts) >= 2 and WORD_RE.match(parts[0]):
        pairs.extend((parts[0], base) for base in parts[1:])
  return pairs


def noun_plural(w):
  if re.search(r"(s|x|z|ch|sh)$", w):
    return w + "es"
  if re.search(r"[^aeiou]y$", w):
    return w[:-1] + "ies"
  return w + "s"


def verb_forms(w):
  forms = [noun_plural(w)]
  if w.endswith("e") and not w.endswith("ee"):
    forms += [w + "d", w[:-1] + "ing"]
  elif re.search(r"[^aeiou]y$", w):
    forms += [w[:-1] + "ied", w + "ing"]
  else:
    forms += [w + "ed", w + "ing"]
  return forms


def main():
  ap = argparse.ArgumentParser()
  ap.add_argument("--wordnet-dir", required=True)
  ap.add_argument("--out-dir", required=True)
  args = ap.parse_args()

  closed = {}
  with open(os.path.join(args.out_dir, "closed_class.tsv")) as f:
    for line in f:
      line = line.rstrip("\n")
      if line:
        word, tag = line.split("\t")
        closed[word] = tag

  by_pos = {tag: read_index(os.path.join(args.wordnet_dir, "index." + name))
            for name, tag in POS_FILES.items()}
  counts = read_counts(os.path.join(args.wordnet_dir, "cntlist.rev"))

  lemma_tags = collections.defaultdict(set)
  for tag, lemmas in by_pos.items():
    for lemma in lemmas:
      lemma_tags[lemma].add(tag)

  selected = {}
  for lemma, tags in lemma_tags.items():
    freq = {t: counts[lemma].get(t, 0) for t in tags}
    top = max(freq.values())
    if top == 0:
      selected[lemma] = set(tags)
    else:
      selected[lemma] = {t for t, c in freq.items() if c >= DOMINANCE * top}

  table = collections.defaultdict(set)
  for lemma, tags in selected.items():
    table[lemma] |= tags
    if "NOUN" in tags:
      table[noun_plural(lemma)].add("NOUN")
    if "VERB" in tags:
      for form in verb_forms(lemma):
        table[form].add("VERB")
  for name, tag in (("noun", "NOUN"), ("verb", "VERB")):
    path = os.path.join(args.wordnet_dir, name + ".exc")
    for form, base in read_exceptions(path):
      if tag in selected.get(base, ()):
        table[form].add(tag)
  for form, base in EXTRA_NOUN_FORMS:
    if "NOUN" in selected.get(base, ()):
      table[form].add("NOUN")
  for word, tag in closed.items():
    table[word] = {tag}

  def word_list(tag):
    return sorted({w for w in by_pos[tag] if w not in closed})

  with open(os.path.join(args.out_dir, "adjectives.txt"), "w") as f:
    f.writelines(w + "\n" for w in word_list("ADJ"))
  with open(os.path.join(args.out_dir, "adverbs.txt"), "w") as f:
    f.writelines(w + "\n" for w in word_list("ADV"))
  with open(os.path.join(args.out_dir, "pos.tsv"), "w") as f:
    for word in sorted(table):
      for tag in sorted(table[word]):
        f.write(f"{word}\t{tag}\n")


if __name__ == "__main__":
  main()
