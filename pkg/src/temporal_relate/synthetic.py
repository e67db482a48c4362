"""Deterministic synthetic corpora: the 5-snapshot story corpus and large random graphs.

Story corpus layout (all links are out-links from the named article):

* two gold seeds, each with eight topic pages; candidate k links to the
  first 9-k topics, so the candidates' neighbour sets are nested and every
  topic has the same degree in every ego network that contains it. Extended
  Jaccard then equals |C_k|^2 / |S|^2 and the gold order is forced;
* an emerging pair that shares nothing until t=3 and one more page per
  snapshot afterwards (the first shared page is reached through redirects);
* a fading pair that peaks at t=2 and loses one shared page per snapshot;
* a stable pair with a fixed overlap.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

LABELS = ["2012", "2013", "2014", "2015", "2016"]
TOPICS = ["Amber", "Basalt", "Cobalt", "Dune", "Ember", "Fjord", "Garnet", "Harbor"]
RELATED = ["Ash", "Birch", "Cedar", "Elm", "Fir", "Hazel", "Larch"]
GOLD_SEEDS = ["Aurora", "Borealis"]

EMERGING = ("Comet_Alpha", "Comet_Beta")
FADING = ("Glacier_North", "Glacier_South")
STABLE = ("Harbor_East", "Harbor_West")


def _gold_component(prefix: str) -> tuple[list[tuple[str, str]], list[str]]:
    seed = f"{prefix}_Hub"
    topics = [f"{prefix}_Topic_{w}" for w in TOPICS]
    edges = [(seed, t) for t in topics]
    ranked = []
    for k, word in enumerate(RELATED, 1):
        cand = f"{prefix}_Related_{word}"
        ranked.append(cand)
        edges += [(cand, t) for t in topics[:len(TOPICS) + 1 - k]]
    return edges, ranked


def story_snapshots() -> dict[str, list[tuple[str, str]]]:
    orbit = ["Orbit_Aphelion", "Orbit_Perihelion", "Orbit_Node", "Orbit_Apsis"]
    nebula = ["Nebula_Dust", "Nebula_Gas", "Nebula_Ion", "Nebula_Plasma"]
    ice = ["Ice_Crevasse", "Ice_Moraine", "Ice_Serac", "Ice_Firn"]
    fjord = ["Fjord_Cliff", "Fjord_Inlet"]
    dock = ["Dock_Crane", "Dock_Pier", "Dock_Quay", "Dock_Slip"]
    fading_shared = {1: 3, 2: 4, 3: 2, 4: 1, 5: 0}

    out = {}
    for t, label in enumerate(LABELS, 1):
        edges = []
        for prefix in GOLD_SEEDS:
            edges += _gold_component(prefix)[0]
        a, b = EMERGING
        edges += [(a, q) for q in orbit]
        edges += [(b, r) for r in nebula]
        if t >= 3:
            # first shared page only exists under an alias that redirects to Orbit_Aphelion
            edges.append((b, "Aphelion"))
            edges += [(b, q) for q in orbit[1:t - 2]]
        if t >= 5:
            edges.append((b, "Aphelion_Point"))
        a, b = FADING
        edges += [(a, u) for u in ice]
        edges += [(b, v) for v in fjord]
        edges += [(b, u) for u in ice[:fading_shared[t]]]
        a, b = STABLE
        edges += [(a, w) for w in dock[:3]]
        edges += [(b, w) for w in dock[1:]]
        out[label] = edges
    return out


def story_redirects() -> dict[str, list[tuple[str, str]]]:
    red = {}
    for t, label in enumerate(LABELS, 1):
        pairs = []
        if t >= 3:
            pairs.append(("Aphelion", "Orbit_Aphelion"))
        if t >= 5:
            pairs.append(("Aphelion_Point", "Aphelion"))
        red[label] = pairs
    return red


def story_gold() -> list[tuple[str, list[str]]]:
    return [(f"{p}_Hub", _gold_component(p)[1]) for p in GOLD_SEEDS]


def story_texts() -> dict[str, str]:
    """One short article per entity built from its own and its linked titles."""
    final = story_snapshots()[LABELS[-1]]
    links: dict[str, list[str]] = {}
    for s, t in final:
        links.setdefault(s, []).append(t)
        links.setdefault(t, [])
    texts = {}
    for name in sorted(links):
        words = [name.replace("_", " ")] + [t.replace("_", " ") for t in links[name]]
        texts[name] = "The article about " + ". It mentions ".join(words) + ".\n"
    return texts


def story_files() -> dict[str, str]:
    """Relative path -> file content for the whole shipped corpus."""
    files = {}
    manifest = []
    redirects = story_redirects()
    for t, (label, edges) in enumerate(story_snapshots().items(), 1):
        files[f"links_{label}.tsv"] = "".join(f"{s}\t{d}\n" for s, d in edges)
        entry = {"label": label, "ordinal": t, "links": f"links_{label}.tsv",
                 "redirects": None, "format": "tsv"}
        if redirects[label]:
            files[f"redirects_{label}.tsv"] = "".join(f"{s}\t{d}\n" for s, d in redirects[label])
            entry["redirects"] = f"redirects_{label}.tsv"
        manifest.append(entry)
    files["manifest.json"] = json.dumps(manifest, indent=2) + "\n"
    files["gold.txt"] = "".join(seed + "\n" + "".join(f"\t{c}\n" for c in ranked)
                                for seed, ranked in story_gold())
    files["pairs.tsv"] = "".join(f"{a}\t{b}\n" for a, b in (EMERGING, FADING, STABLE))
    config = {"manifest": "manifest.json", "gold": "gold.txt",
              "methods": ["jaccard", "ext-rd", "ext-rp", "ext-rd-tw"],
              "modes": ["in", "out", "inout"], "snapshots": True,
              "models": ["intersection", "union-uniform", "union-linear", "union-exponential"],
              "decay_r": 0.1, "hops": 2}
    files["config.json"] = json.dumps(config, indent=2) + "\n"
    for name, text in story_texts().items():
        files[f"texts/{name}.txt"] = text
    return files


def write_story(directory: str | Path) -> Path:
    directory = Path(directory)
    for rel, content in story_files().items():
        path = directory / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(content)
    return directory


def random_edges(n_edges: int, n_nodes: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Uniform random directed edges without self-loops (duplicates possible)."""
    rng = np.random.default_rng(seed)
    src = rng.integers(0, n_nodes, size=n_edges)
    dst = (src + rng.integers(1, n_nodes, size=n_edges)) % n_nodes
    return src, dst


def write_edge_tsv(path: str | Path, src, dst, prefix: str = "E") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.writelines(f"{prefix}{s}\t{prefix}{d}\n" for s, d in zip(src.tolist(), dst.tolist()))


if __name__ == "__main__":
    import sys

    write_story(sys.argv[1] if len(sys.argv) > 1 else "story")
