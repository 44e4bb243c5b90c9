#!/usr/bin/env python3
"""Generates the synthetic Spanish-like tweet fixture under data/fixture/.

Sentiment is planted lexically: positive and negative cue words, negated
positives, mixed tweets for NEU and informative tweets for NONE. A little
label noise keeps the task from being trivial. Output is fully determined
by the seed below.
"""

import json
import random
from collections import Counter
from pathlib import Path

SEED = 20190901
DIM = 50
BUCKETS = 2_000_000
MIN_N, MAX_N = 3, 6

POSITIVE = ["genial", "excelente", "feliz", "alegro", "encanta", "bueno", "maravilloso",
            "hermoso", "gracias", "increíble", "precioso", "contento", "fantástico", "amo"]
NEGATIVE = ["odio", "horrible", "triste", "malo", "asco", "peor", "terrible", "fatal",
            "enojado", "basura", "harto", "pésimo", "cansado", "decepción"]
NEUTRAL_HINT = ["aunque", "pero", "bueno", "quizás", "depende", "regular"]
TOPICAL = ["mañana", "partido", "reunión", "noticia", "horario", "tren", "clima", "examen",
           "concierto", "elecciones", "programa", "capítulo", "ruta", "precio", "entrada"]
CONTENT = ["día", "gente", "casa", "trabajo", "vida", "tiempo", "ciudad", "equipo",
           "gobierno", "país", "semana", "noche", "amigos", "familia", "escuela", "música"]
FILLER = ["el", "la", "de", "que", "en", "y", "a", "los", "se", "por", "un", "para", "con",
          "una", "su", "al", "lo", "como", "más", "muy", "este", "esta", "hoy", "todo", "me"]
NEGATION = ["no", "nunca", "jamás", "ni", "tampoco", "nada", "sin"]
STOPWORDS = FILLER + ["es", "del", "las", "le", "ya", "o", "nos", "sí", "hay", "sin", "no", "ni"]
EMOJI_POS = ["😀", "😍", "👍🏽", "❤️"]
EMOJI_NEG = ["😡", "😢", "👎"]
HANDLES = ["@juan_p", "@maria88", "@elpais", "@club_fc", "@ana"]
URLS = ["https://t.co/abc123", "http://ejemplo.com/nota", "www.noticias.es/hoy"]
LEMMAS = {"alegro": "alegrar", "encanta": "encantar", "odio": "odiar", "amo": "amar",
          "contento": "contento", "amigos": "amigo", "elecciones": "elección",
          "cansado": "cansar", "enojado": "enojar"}
SYNONYMS = {"genial": "excelente", "excelente": "genial", "horrible": "terrible",
            "terrible": "horrible", "feliz": "contento", "triste": "fatal", "día": "jornada",
            "gente": "personas", "casa": "hogar", "trabajo": "empleo"}

LABEL_MIX = [("P", 0.30), ("N", 0.45), ("NEU", 0.12), ("NONE", 0.13)]


def pick_label(rng):
    x = rng.random()
    acc = 0.0
    for label, p in LABEL_MIX:
        acc += p
        if x < acc:
            return label
    return LABEL_MIX[-1][0]


def elongate(word, rng):
    if rng.random() < 0.1 and len(word) > 3:
        i = rng.randrange(len(word))
        if word[i].isalpha():
            return word[: i + 1] + word[i] * rng.randint(2, 4) + word[i + 1:]
    return word


def core(label, rng):
    words = []
    if label == "P":
        words += [elongate(rng.choice(POSITIVE), rng) for _ in range(rng.randint(1, 2))]
        if rng.random() < 0.3:
            words.append(rng.choice(EMOJI_POS))
    elif label == "N":
        if rng.random() < 0.25:
            words += ["no", rng.choice(POSITIVE)]
        else:
            words += [elongate(rng.choice(NEGATIVE), rng) for _ in range(rng.randint(1, 2))]
        if rng.random() < 0.3:
            words.append(rng.choice(EMOJI_NEG))
    elif label == "NEU":
        words += [rng.choice(POSITIVE), rng.choice(NEUTRAL_HINT), rng.choice(NEGATIVE)]
    else:
        words += [rng.choice(TOPICAL), rng.choice(TOPICAL)]
        if rng.random() < 0.3:
            words.append("?")
    return words


def tweet(label, rng):
    parts = core(label, rng)
    for _ in range(rng.randint(3, 9)):
        parts.insert(rng.randint(0, len(parts)), rng.choice(FILLER + CONTENT))
    if rng.random() < 0.35:
        parts.insert(0, rng.choice(HANDLES))
    if rng.random() < 0.2:
        parts.append(rng.choice(URLS))
    if rng.random() < 0.15:
        parts.append("#" + rng.choice(CONTENT))
    if rng.random() < 0.4:
        parts.append(rng.choice([".", "!", "!!", "..."]))
    text = " ".join(parts)
    if rng.random() < 0.3:
        text = text[0].upper() + text[1:]
    return text


def fnv1a32(data: bytes) -> int:
    h = 0x811C9DC5
    for b in data:
        h ^= b
        h = (h * 0x01000193) & 0xFFFFFFFF
    return h


def ngrams(word):
    w = "<" + word + ">"
    out = []
    for n in range(MIN_N, MAX_N + 1):
        for i in range(len(w) - n + 1):
            out.append(w[i:i + n])
    return out


def fmt(v):
    return " ".join(f"{x:.6f}" for x in v)


def main():
    rng = random.Random(SEED)
    root = Path(__file__).resolve().parent.parent / "data" / "fixture"
    root.mkdir(parents=True, exist_ok=True)

    labels = ["P", "N", "NEU", "NONE"]
    rows = []
    for i in range(500):
        label = pick_label(rng)
        text = tweet(label, rng)
        if rng.random() < 0.08:
            label = rng.choice([l for l in labels if l != label])
        rows.append((f"fx{i:04d}", text, label))

    splits = {"train": rows[:300], "dev": rows[300:400], "test": rows[400:]}
    for name, part in splits.items():
        with open(root / f"{name}.tsv", "w", encoding="utf-8") as f:
            for rid, text, label in part:
                f.write(f"{rid}\t{text}\t{label}\n")

    (root / "stopwords.txt").write_text("\n".join(sorted(set(STOPWORDS))) + "\n", encoding="utf-8")
    (root / "negation.txt").write_text("\n".join(NEGATION) + "\n", encoding="utf-8")
    (root / "lemmas.tsv").write_text(
        "".join(f"{k}\t{v}\n" for k, v in sorted(LEMMAS.items())), encoding="utf-8")

    # Embeddings: a positive and a negative direction plus noise. Only part of
    # the lexicon is stored so the subword path gets exercised.
    erng = random.Random(SEED + 1)
    pos_dir = [erng.gauss(0, 1) for _ in range(DIM)]
    neg_dir = [erng.gauss(0, 1) for _ in range(DIM)]

    def vec(direction, scale):
        return [scale * d + erng.gauss(0, 0.3) for d in direction] if direction else \
            [erng.gauss(0, 0.5) for _ in range(DIM)]

    vocab = {}
    for w in POSITIVE + [LEMMAS.get(w, w) for w in POSITIVE]:
        vocab.setdefault(w, vec(pos_dir, 1.0))
    for w in NEGATIVE + [LEMMAS.get(w, w) for w in NEGATIVE]:
        vocab.setdefault(w, vec(neg_dir, 1.0))
    for w in TOPICAL + CONTENT + NEUTRAL_HINT:
        vocab.setdefault(w, vec(None, 0))
    stored = {w: v for k, (w, v) in enumerate(sorted(vocab.items())) if k % 4 != 0}
    with open(root / "embeddings.vec", "w", encoding="utf-8") as f:
        f.write(f"{len(stored)} {DIM}\n")
        for w, v in sorted(stored.items()):
            f.write(f"{w} {fmt(v)}\n")

    buckets = {}
    for w in POSITIVE + NEGATIVE:
        direction = pos_dir if w in POSITIVE else neg_dir
        for g in ngrams(w):
            b = fnv1a32(g.encode("utf-8")) % BUCKETS
            buckets.setdefault(b, vec(direction, 0.8))
    with open(root / "subwords.vec", "w", encoding="utf-8") as f:
        f.write(f"{MIN_N} {MAX_N} {BUCKETS}\n")
        for b, v in sorted(buckets.items()):
            f.write(f"{b} {fmt(v)}\n")

    counts = Counter()
    for _, text, _ in rows:
        counts.update(t.lower() for t in text.split())
    for w in vocab:
        counts[w] += 1
    with open(root / "unigrams.tsv", "w", encoding="utf-8") as f:
        for w, c in sorted(counts.items()):
            f.write(f"{w}\t{c}\n")

    # Two-way translation tables: es -> pivot tags the text, pivot -> es swaps
    # in synonyms so the round trip yields a paraphrase.
    tables = []
    for pivot in ["en", "fr"]:
        forward, backward = {}, {}
        for _, text, _ in splits["train"]:
            tagged = f"[{pivot}] {text}"
            forward[text] = tagged
            backward[tagged] = " ".join(SYNONYMS.get(t, t) for t in text.split())
        tables.append({"src_lang": "es", "dst_lang": pivot, "entries": forward})
        tables.append({"src_lang": pivot, "dst_lang": "es", "entries": backward})
    with open(root / "translations.json", "w", encoding="utf-8") as f:
        json.dump(tables, f, ensure_ascii=False, indent=1, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    main()
