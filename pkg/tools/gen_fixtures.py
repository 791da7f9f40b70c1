#!/usr/bin/env python3
"""Builds the committed 50-question fixture world under tests/fixtures/.

The world is fully constructed (no randomness): each question owns a block
of ten entity ids (Q1000 + 10*i), with the question subject at +0, a
"sibling" neighbor at +3, the gold answer at +5, and generated-candidate
distractors from +6 up.  Zero-padded ids make lexicographic order equal
numeric order, so every tie-break lands where the design says it does.

Question archetypes:
  A  gold reachable only as a neighbor, strong connecting-property match
  N  A plus a fourth candidate type whose label sits exactly at the
     similarity threshold (never admitted: the comparison is strict)
  E  A but the gold's type only enters the expected set via label
     similarity to a top-3 type
  B  gold both generated and a neighbor; a sibling shares the same
     connecting property, tying the property score
  C  gold generated at beam 0 but not a neighbor
  D  gold untyped, generated at beam 0 and a neighbor

After writing the files the script recomputes everything with the plain
reference scorer (tests/oracle.py) and prints the values to freeze into
the acceptance tests.  All embedding components are integers so the
cosines are bit-for-bit reproducible.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

from tests.oracle import rank_ref, type_set_ref  # noqa: E402

OUT = ROOT / "tests" / "fixtures"

QVEC = [100, 0]  # every question text embeds here

# property id -> (label, vector); cosines against QVEC:
#   (90,44) ~ 0.8984   (60,80) = 0.6   (95,31) ~ 0.9506
#   (70,71) ~ 0.7021   (80,60) = 0.8   (25,100) ~ 0.2425
PROPERTIES = {
    "PA01": ("place of birth", [90, 44]),
    "PA02": ("place of death", [60, 80]),
    "PK01": ("publisher", [95, 31]),
    "PK02": ("developer", [70, 71]),
    "PB01": ("member of", [80, 60]),
    "PC02": ("studio location", [25, 100]),
    "PD01": ("place of origin", [90, 44]),
    "PD02": ("storage location", [60, 80]),
}

# only the types that take part in similarity admission carry labels
TYPE_LABELS = {
    "TE03": ("scroll kind", [10, 0]),
    "TE04": ("codex kind", [8, 6]),   # cos to scroll kind = 0.8 > 0.6: admitted
    "TN01": ("chronicle kind", [10, 0]),
    "TN04": ("ledger kind", [6, 8]),  # cos to chronicle kind = 0.6 exactly: kept out
}


def build_questions():
    """Return the 50 question specs in file order."""
    questions = []

    def add(qid, text, archetype, labels, types, edges, candidates, phantom,
            gold_prop, expected_m):
        questions.append(
            {
                "qid": qid,
                "text": text,
                "archetype": archetype,
                "labels": labels,       # role -> label; roles qent/sibling/gold/d6..d9
                "types": types,         # role -> [type ids]
                "edges": edges,         # [(prop, object-role)] out of qent
                "candidates": candidates,  # beam-ordered labels (roles), phantom last
                "phantom": phantom,
                "gold_prop": gold_prop,
                "expected_m": expected_m,
            }
        )

    # q001: the publisher question; gold never generated, types fully match
    add(
        "q001",
        "Who published neo contra?",
        "A1",
        {
            "qent": "neo contra",
            "gold": "Konami",
            "sibling": "Hudson Soft",
            "d6": "Avalon Hill",
            "d7": "Activision",
            "d8": "Sega",
            "d9": "Nintendo",
        },
        {
            "gold": ["TK01", "TK02"],
            "sibling": ["TK01", "TK02"],
            "d6": ["TK01", "TK02"],
            "d7": ["TK01", "TK02"],
            "d8": ["TK01", "TK02"],
            "d9": ["TK01", "TK02"],
        },
        [("PK01", "gold"), ("PK02", "sibling")],
        # "Sega." exercises trailing-dot normalization
        ["Avalon Hill", "Activision", "Sega.", "Nintendo"],
        "Electronic Arts",
        "PK01",
        4,
    )

    # q002: birthplace question with wrong-city candidates
    add(
        "q002",
        "What is the place of birth of Philipp Apian?",
        "A",
        {
            "qent": "Philipp Apian",
            "gold": "Ingolstadt",
            "sibling": "Tübingen",
            "d6": "Munich",
            "d7": "Augsburg",
            "d8": "Nuremberg",
            "d9": "Bavaria",
        },
        {
            "gold": ["TA01"],
            "sibling": ["TA01"],
            "d6": ["TA01"],
            "d7": ["TA01"],
            "d8": ["TA01"],
            "d9": ["TA02"],
        },
        [("PA01", "gold"), ("PA02", "sibling")],
        # lowercase surface exercises case folding
        ["Munich", "Augsburg", "nuremberg", "Bavaria"],
        "Vienna",
        "PA01",
        3,
    )

    # q003..q019: plain A
    for i in range(3, 20):
        n = f"{i:02d}"
        add(
            f"q0{n}",
            f"What is the place of birth of scholar {n}?",
            "A",
            {
                "qent": f"scholar {n}",
                "gold": f"birth town {n}",
                "sibling": f"grave town {n}",
                "d6": f"guess town {n}a",
                "d7": f"guess town {n}b",
                "d8": f"guess town {n}c",
                "d9": f"guess region {n}",
            },
            {
                "gold": ["TA01"],
                "sibling": ["TA01"],
                "d6": ["TA01"],
                "d7": ["TA01"],
                "d8": ["TA01"],
                "d9": ["TA02"],
            },
            [("PA01", "gold"), ("PA02", "sibling")],
            [f"guess town {n}a", f"guess town {n}b", f"guess town {n}c",
             f"guess region {n}"],
            f"unmatched place {n}",
            "PA01",
            3,
        )

    # q020: threshold negative control
    add(
        "q020",
        "What is the place of birth of chronicler 20?",
        "N",
        {
            "qent": "chronicler 20",
            "gold": "birth town 20",
            "sibling": "grave town 20",
            "d6": "guess town 20a",
            "d7": "guess town 20b",
            "d8": "guess town 20c",
            "d9": "guess ledger 20",
        },
        {
            "gold": ["TN01"],
            "sibling": ["TN01"],
            "d6": ["TN01"],
            "d7": ["TN01", "TN02"],
            "d8": ["TN02", "TN03"],
            "d9": ["TN04", "TN01"],
        },
        [("PA01", "gold"), ("PA02", "sibling")],
        ["guess town 20a", "guess town 20b", "guess town 20c", "guess ledger 20"],
        "unmatched place 20",
        "PA01",
        3,
    )

    # q021..q023: similarity admission carries the gold type into the set
    for i in range(21, 24):
        n = f"{i:02d}"
        add(
            f"q0{n}",
            f"What is the place of birth of copyist {n}?",
            "E",
            {
                "qent": f"copyist {n}",
                "gold": f"birth town {n}",
                "sibling": f"grave town {n}",
                "d6": f"guess work {n}a",
                "d7": f"guess work {n}b",
                "d8": f"guess work {n}c",
                "d9": f"guess codex {n}",
            },
            {
                "gold": ["TE04"],
                "sibling": ["TE05"],
                "d6": ["TE01"],
                "d7": ["TE01", "TE02"],
                "d8": ["TE02", "TE03"],
                "d9": ["TE04"],
            },
            [("PA01", "gold"), ("PA02", "sibling")],
            [f"guess work {n}a", f"guess work {n}b", f"guess work {n}c",
             f"guess codex {n}"],
            f"unmatched place {n}",
            "PA01",
            1,
        )

    # q024..q037: B; gold generated at beam 2 and a neighbor; the sibling
    # shares the connecting property, so the property score alone ties
    for i in range(24, 38):
        n = f"{i:02d}"
        four_match = i < 30
        add(
            f"q0{n}",
            f"Which circle does member {n} belong to?",
            "B4" if four_match else "B3",
            {
                "qent": f"member {n}",
                "gold": f"guild {n} prime",
                "sibling": f"guild {n} minor",
                "d6": f"circle {n}a",
                "d7": f"circle {n}b",
                "d8": f"circle {n}c",
            },
            {
                "gold": ["TB01"],
                "sibling": ["TB01"],
                "d6": ["TB01"],
                "d7": ["TB01"],
                "d8": ["TB01"] if four_match else ["TB02"],
            },
            [("PB01", "gold"), ("PB01", "sibling")],
            [f"circle {n}a", f"circle {n}b", f"guild {n} prime", f"circle {n}c"],
            f"phantom circle {n}",
            "PB01",
            4 if four_match else 3,
        )

    # q038..q047: C; gold generated first but not connected to the subject
    for i in range(38, 48):
        n = f"{i:02d}"
        add(
            f"q0{n}",
            f"What is the masterpiece of painter {n}?",
            "C",
            {
                "qent": f"painter {n}",
                "gold": f"masterpiece {n}",
                "sibling": f"atelier {n}",
                "d7": f"sketch {n}a",
                "d8": f"sketch {n}b",
                "d9": f"mural {n}",
            },
            {
                "gold": ["TC02"],
                "sibling": ["TC04"],
                "d7": ["TC01"],
                "d8": ["TC01"],
                "d9": ["TC03"],
            },
            [("PC02", "sibling")],
            [f"masterpiece {n}", f"sketch {n}a", f"sketch {n}b", f"mural {n}"],
            f"rumored work {n}",
            None,
            1,
        )

    # q048..q050: D; untyped gold generated first and well connected
    for i in range(48, 51):
        n = f"{i:02d}"
        add(
            f"q0{n}",
            f"Where does artifact {n} come from?",
            "D",
            {
                "qent": f"artifact {n}",
                "gold": f"origin site {n}",
                "sibling": f"museum hall {n}",
                "d7": f"claimed site {n}a",
                "d8": f"claimed site {n}b",
                "d9": f"claimed site {n}c",
            },
            {
                "sibling": ["TD01"],
                "d7": ["TD01"],
                "d8": ["TD01"],
                "d9": ["TD01"],
            },
            [("PD01", "gold"), ("PD02", "sibling")],
            [f"origin site {n}", f"claimed site {n}a", f"claimed site {n}b",
             f"claimed site {n}c"],
            f"myth site {n}",
            "PD01",
            0,
        )

    assert len(questions) == 50
    return questions


ROLE_OFFSETS = {
    "qent": 0,
    "sibling": 3,
    "gold": 5,
    "d6": 6,
    "d7": 7,
    "d8": 8,
    "d9": 9,
}


def entity_id(index, role):
    return f"Q{1000 + 10 * index + ROLE_OFFSETS[role]}"


def normalize(surface):
    s = surface.strip()
    if s.endswith("."):
        s = s[:-1]
    return s.casefold()


def materialize(questions):
    """Expand specs into raw triple/label/embedding/candidate structures."""
    triples = []
    entity_labels = {}       # entity id -> label
    types_by_entity = {}
    label_to_entity = {}
    vectors = {}
    candidate_rows = []
    entity_rows = []
    dataset_rows = []

    for prop, (label, vec) in PROPERTIES.items():
        vectors.setdefault(label, vec)
    type_label_map = {}
    for type_id, (label, vec) in TYPE_LABELS.items():
        type_label_map[type_id] = label
        vectors.setdefault(label, vec)

    for index, q in enumerate(questions):
        ids = {role: entity_id(index, role) for role in q["labels"]}
        for role, label in q["labels"].items():
            entity_labels[ids[role]] = label
            key = normalize(label)
            assert key not in label_to_entity, f"label collision: {label}"
            label_to_entity[key] = ids[role]
        for role, tlist in q["types"].items():
            types_by_entity[ids[role]] = tuple(tlist)
            for t in tlist:
                triples.append((ids[role], "P31", t))
        for prop, target_role in q["edges"]:
            triples.append((ids["qent"], prop, ids[target_role]))

        vectors.setdefault(q["text"], QVEC)
        candidate_rows.append(
            {
                "question_id": q["qid"],
                "question_text": q["text"],
                "candidates": q["candidates"] + [q["phantom"]],
                "meta": {
                    "beams": 200,
                    "diversity_penalty": 0.1,
                    "model": "seq2seq-qa-large",
                },
            }
        )
        entity_rows.append({"question_id": q["qid"], "entities": [ids["qent"]]})
        row = {
            "question_id": q["qid"],
            "question_text": q["text"],
            "answers": [ids["gold"]],
            "entities": [ids["qent"]],
        }
        if q["gold_prop"]:
            row["property"] = q["gold_prop"]
        dataset_rows.append(row)

    return {
        "triples": triples,
        "entity_labels": entity_labels,
        "types_by_entity": types_by_entity,
        "label_to_entity": label_to_entity,
        "vectors": vectors,
        "type_label_map": type_label_map,
        "candidate_rows": candidate_rows,
        "entity_rows": entity_rows,
        "dataset_rows": dataset_rows,
    }


def raw_pool(q, index, world):
    """Reference linking + neighbor expansion from the raw structures."""
    ids = {role: entity_id(index, role) for role in q["labels"]}
    entries = []
    by_entity = {}
    for beam, surface in enumerate(q["candidates"] + [q["phantom"]]):
        entity = world["label_to_entity"].get(normalize(surface))
        if entity is None:
            continue
        if entity in by_entity:
            continue
        row = [entity, beam, ()]
        by_entity[entity] = row
        entries.append(row)
    edges = sorted((prop, ids[role]) for prop, role in q["edges"])
    for prop, obj in edges:
        if obj in by_entity:
            row = by_entity[obj]
            row[2] = tuple(sorted(set(row[2]) | {prop}))
        else:
            row = [obj, None, (prop,)]
            by_entity[obj] = row
            entries.append(row)
    return [tuple(row) for row in entries], ids


def plabel_map():
    return {prop: label for prop, (label, _vec) in PROPERTIES.items()}


def reference_results(questions, world):
    """Grid, type metrics and per-question detail via the reference scorer."""
    plabels = plabel_map()
    per_question = {}
    for index, q in enumerate(questions):
        entries, ids = raw_pool(q, index, world)
        lm_entities = [e for e, beam, _via in entries if beam is not None]
        expected = type_set_ref(
            lm_entities,
            world["types_by_entity"],
            world["type_label_map"],
            world["vectors"],
            k=3,
            threshold=0.6,
        )
        per_question[q["qid"]] = {
            "entries": entries,
            "ids": ids,
            "lm": lm_entities,
            "T": expected,
            "gold": ids["gold"],
            "c_size": len(q["candidates"]) + 1,
            "text": q["text"],
        }

    grid = {}
    for source in ("t2t", "neighbours", "full"):
        for mask_name in ("type", "neighbour", "t2t", "property", "all"):
            mask = (
                ("type", "neighbour", "t2t", "property")
                if mask_name == "all"
                else (mask_name,)
            )
            hits = 0
            for q in questions:
                detail = per_question[q["qid"]]
                entries = detail["entries"]
                if source == "t2t":
                    entries = [e for e in entries if e[1] is not None]
                elif source == "neighbours":
                    entries = [e for e in entries if e[2]]
                rows = rank_ref(
                    entries,
                    detail["T"],
                    detail["c_size"],
                    detail["text"],
                    world["types_by_entity"],
                    plabels,
                    world["vectors"],
                    mask=mask,
                )
                if rows and rows[0][0] == detail["gold"]:
                    hits += 1
            grid[(source, mask_name)] = hits

    # type metrics, counted directly
    question_hits = 0
    candidate_total = 0
    candidate_hits = 0
    for q in questions:
        detail = per_question[q["qid"]]
        gold_types = set(world["types_by_entity"].get(detail["gold"], ()))
        if gold_types and set(detail["T"]) & gold_types:
            question_hits += 1
        q_hits = 0
        for entity in detail["lm"]:
            candidate_total += 1
            if gold_types and set(world["types_by_entity"].get(entity, ())) & gold_types:
                candidate_hits += 1
                q_hits += 1
        assert q_hits == q["expected_m"], (q["qid"], q_hits, q["expected_m"])

    return per_question, grid, question_hits, candidate_total, candidate_hits


def write_files(world):
    OUT.mkdir(parents=True, exist_ok=True)
    kg_dir = OUT / "kg"
    kg_dir.mkdir(exist_ok=True)

    lines = ["# fixture knowledge graph: question scenes, ten-id blocks per question"]
    for subj, prop, obj in world["triples"]:
        lines.append(f"{subj}\t{prop}\t{obj}")
    (kg_dir / "triples.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    label_lines = []
    for entity in sorted(world["entity_labels"]):
        label_lines.append(f"{entity}\tlabel\ten\t{world['entity_labels'][entity]}")
    label_lines.append("Q1005\talias\t-\tKonami Holdings")
    label_lines.append("Q1015\talias\t-\tIngolstadt an der Donau")
    for type_id in sorted(world["type_label_map"]):
        label_lines.append(f"{type_id}\tlabel\ten\t{world['type_label_map'][type_id]}")
    for prop in sorted(PROPERTIES):
        label, _vec = PROPERTIES[prop]
        label_lines.append(f"{prop}\tplabel\ten\t{label}")
    (kg_dir / "labels.tsv").write_text("\n".join(label_lines) + "\n", encoding="utf-8")

    emb_lines = ["#dim 2"]
    for key in world["vectors"]:
        x, y = world["vectors"][key]
        emb_lines.append(f"{key}\t{x},{y}")
    (OUT / "embeddings.tsv").write_text("\n".join(emb_lines) + "\n", encoding="utf-8")

    for name, rows in [
        ("candidates.jsonl", world["candidate_rows"]),
        ("entities.jsonl", world["entity_rows"]),
        ("dataset.jsonl", world["dataset_rows"]),
    ]:
        text = "\n".join(json.dumps(r, ensure_ascii=False) for r in rows) + "\n"
        (OUT / name).write_text(text, encoding="utf-8")


def main():
    questions = build_questions()
    world = materialize(questions)
    per_question, grid, q_hits, c_total, c_hits = reference_results(questions, world)

    write_files(world)

    known = set(world["entity_labels"])
    for s, _p, o in world["triples"]:
        known.add(s)
        known.add(o)
    print(f"questions: {len(questions)}")
    print(f"known ids: {len(known)}, triples: {len(world['triples'])}, "
          f"embeddings: {len(world['vectors'])}")
    print(f"type accuracy: {q_hits}/{len(questions)}")
    print(f"candidate match: {c_hits}/{c_total}")

    print("\nablation grid (hits out of 50):")
    for source in ("t2t", "neighbours", "full"):
        row = {m: grid[(source, m)] for m in ("type", "neighbour", "t2t", "property", "all")}
        print(f"  {source:<12} {row}")

    best = grid[("full", "all")]
    assert all(best >= v for v in grid.values()), "full/all must be the maximum"

    for qid in ("q001", "q002", "q020", "q021"):
        detail = per_question[qid]
        rows = rank_ref(
            detail["entries"],
            detail["T"],
            detail["c_size"],
            detail["text"],
            world["types_by_entity"],
            plabel_map(),
            world["vectors"],
        )
        print(f"\n{qid}: T={detail['T']}")
        for row in rows[:3]:
            print(f"  {row[0]}  type={row[1]!r} neigh={row[2]!r} "
                  f"t2t={row[3]!r} prop={row[4]!r} final={row[5]!r}")


if __name__ == "__main__":
    main()
