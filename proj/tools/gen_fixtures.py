#!/usr/bin/env python3
"""Regenerates the synthetic fixtures under tests/data from a fixed seed.

    python3 tools/gen_fixtures.py [--out tests/data]

Output is deterministic; the generated files are checked in.
"""
import argparse
import json
import os
import random

SEED = 20230614

TOPICS = [
    "Treatment", "Prevention", "Diagnosis", "Mechanism", "Transmission",
    "Case Report", "Epidemic Forecasting", "Long COVID",
]
TOPIC_MARKERS = {
    "Treatment": ["therapeutic", "treatment", "randomized", "dosing", "antiviral", "efficacy"],
    "Prevention": ["masks", "distancing", "prevention", "lockdown", "hygiene", "quarantine"],
    "Diagnosis": ["diagnostic", "pcr", "sensitivity", "specificity", "assay", "imaging"],
    "Mechanism": ["mechanism", "ace2", "receptor", "binding", "pathway", "cytokine"],
    "Transmission": ["transmission", "household", "contacts", "aerosol", "spread", "superspreading"],
    "Case Report": ["case", "presented", "year-old", "admitted", "report", "unusual"],
    "Epidemic Forecasting": ["forecasting", "projections", "epidemic", "curve", "simulations", "compartmental"],
    "Long COVID": ["persistent", "post-acute", "sequelae", "long-term", "lingering", "recovery"],
}
TOPIC_WEIGHTS = [0.22, 0.2, 0.16, 0.12, 0.1, 0.08, 0.06, 0.06]

FILLER = (
    "cohort analysis outcomes significant observed clinical data study results population associated "
    "risk factors hospital patients baseline median interquartile range adjusted ratio confidence "
    "interval sample participants measured compared groups higher lower rates increase decrease "
    "overall findings evidence suggest support trial review systematic retrospective prospective "
    "multicenter national regional settings healthcare workers admission severity score laboratory "
    "markers levels values cases controls period enrolled consecutive primary secondary endpoint "
    "analyses regression multivariable sensitivity-analysis subgroup women men age older younger "
    "children adults years weeks days frequency proportion estimates incidence prevalence"
).split()

COVID_OPENERS = [
    "Patients with COVID-19 were enrolled",
    "SARS-CoV-2 infection remains a major burden",
    "We studied adults with confirmed COVID-19",
    "Coronavirus disease 2019 (COVID-19) is caused by SARS-CoV-2",
    "Hospitalized COVID-19 patients were followed",
    "The SARS-CoV-2 outbreak required rapid evidence",
]

OTHER_FIELDS = {
    "oncology": "tumor carcinoma chemotherapy metastatic oncology radiotherapy biopsy malignancy staging lymphoma "
                "resection adjuvant neoplasm survival recurrence".split(),
    "cardiology": "cardiac myocardial infarction arrhythmia stent coronary-artery ventricular echocardiography "
                  "hypertension atrial fibrillation valve ejection statin angina".split(),
    "ecology": "species habitat biodiversity forest soil pollinators wetland invasive population-dynamics "
               "rainfall canopy predation conservation grassland".split(),
    "orthopedics": "fracture knee arthroplasty tendon ligament spine osteoporosis cartilage implant "
                   "rehabilitation hip shoulder bone".split(),
    "dermatology": "psoriasis eczema dermatitis lesions topical melanoma keratinocyte pruritus acne "
                   "skin rash biologics phototherapy".split(),
}

STRAIN_SURFACES = {
    "STRAIN:Alpha": [("Alpha", True), ("B.1.1.7", False)],
    "STRAIN:Beta": [("Beta", True), ("B.1.351", False)],
    "STRAIN:Gamma": [("Gamma", True), ("P.1", False)],
    "STRAIN:Delta": [("Delta", True), ("B.1.617.2", False)],
    "STRAIN:Omicron": [("Omicron", False), ("B.1.1.529", False)],
}
VACCINE_SURFACES = {
    "VAX:BNT162b2": ["BNT162b2", "Comirnaty", "Pfizer-BioNTech"],
    "VAX:mRNA-1273": ["mRNA-1273", "Spikevax"],
    "VAX:Ad26.COV2.S": ["Ad26.COV2.S"],
    "VAX:ChAdOx1": ["ChAdOx1 nCoV-19", "AZD1222"],
    "VAX:CoronaVac": ["CoronaVac"],
    "VAX:NVX-CoV2373": ["NVX-CoV2373"],
}
FUNDERS = {
    "FUND:Pfizer": "Pfizer", "FUND:Moderna": "Moderna", "FUND:Janssen": "Janssen",
    "FUND:AstraZeneca": "AstraZeneca", "FUND:Sinovac": "Sinovac", "FUND:Novavax": "Novavax",
    "FUND:BioNTech": "BioNTech",
}
DRUGS = {
    "DRUG:Remdesivir": "remdesivir", "DRUG:Dexamethasone": "dexamethasone", "DRUG:Tocilizumab": "tocilizumab",
    "DRUG:Nirmatrelvir": "nirmatrelvir", "DRUG:Molnupiravir": "molnupiravir", "DRUG:Baricitinib": "baricitinib",
}

SURNAMES = ("Chen Smith Garcia Kumar Muller Rossi Tanaka Silva Novak Okafor Jensen Haddad Kowalski Lee Brown "
            "Nguyen Ivanova Costa Dubois Ahmed Park Schmidt Lopez Moreau Singh").split()


class Field:
    """Accumulates text and the byte spans of inserted mentions."""

    def __init__(self):
        self.parts = []
        self.length = 0
        self.spans = []

    def add(self, text, mention=None):
        if mention is not None:
            etype, concept = mention
            self.spans.append((self.length, self.length + len(text.encode()), text, etype, concept))
        self.parts.append(text)
        self.length += len(text.encode())
        return self

    def text(self):
        return "".join(self.parts)


def filler_sentence(rng, n=None, pool=FILLER):
    n = n or rng.randint(7, 12)
    words = [rng.choice(pool) for _ in range(n)]
    words[0] = words[0].capitalize()
    return " ".join(words) + "."


def authors(rng):
    return [f"{rng.choice(SURNAMES)} {rng.choice('ABCDEFGHJKLMNPRSTW')}{rng.choice('ABCDEFGHJKLMNPRSTW')}"
            for _ in range(rng.randint(1, 5))]


def random_date(rng, start=(2020, 1), end=(2023, 6)):
    months = (end[0] - start[0]) * 12 + (end[1] - start[1])
    m = rng.randint(0, months)
    year, month = start[0] + (start[1] - 1 + m) // 12, (start[1] - 1 + m) % 12 + 1
    return f"{year:04d}-{month:02d}-{rng.randint(1, 28):02d}"


def record(pmid, title, abstract, journal, date, rng, keywords=None, mesh=None, funding="", country=""):
    return {
        "pmid": pmid, "title": title, "abstract": abstract, "journal": journal, "pub_date": date,
        "authors": authors(rng), "keywords": keywords or [], "mesh_terms": mesh or [],
        "funding_text": funding, "country": country,
    }


def pick_topics(rng):
    k = rng.choices([1, 2, 3], weights=[0.5, 0.35, 0.15])[0]
    chosen = set()
    while len(chosen) < k:
        chosen.add(rng.choices(TOPICS, weights=TOPIC_WEIGHTS)[0])
    return [t for t in TOPICS if t in chosen]


def strain_phrase(rng, concept):
    surface, ambiguous = rng.choice(STRAIN_SURFACES[concept])
    return surface, ambiguous


def covid_doc(rng, pmid, journal, date, topics, strain=None, vaccine=None, drug=None, entity_field="abstract"):
    """A COVID-19 article carrying topic marker tokens and optional entity sentences."""
    title = Field()
    abstract = Field()
    lead = TOPIC_MARKERS[topics[0]]
    title.add(f"{rng.choice(lead).capitalize()} {rng.choice(lead)} in COVID-19: {rng.choice(FILLER)} "
              f"{rng.choice(FILLER)} {rng.choice(FILLER)}")
    abstract.add(rng.choice(COVID_OPENERS) + ". ")
    for topic in topics:
        markers = rng.sample(TOPIC_MARKERS[topic], rng.randint(3, 4))
        words = markers + [rng.choice(FILLER) for _ in range(rng.randint(4, 7))]
        rng.shuffle(words)
        abstract.add(" ".join(words).capitalize() + ". ")
    abstract.add(filler_sentence(rng) + " ")
    target = title if entity_field == "title" else abstract
    if strain and vaccine:
        s_surface, _ = strain_phrase(rng, strain)
        v_surface = rng.choice(VACCINE_SURFACES[vaccine])
        if target is title:
            title.add(" after ")
            title.add(v_surface, ("vaccine", vaccine))
            title.add(" vaccination against the ")
            title.add(s_surface, ("strain", strain))
            title.add(" variant")
        else:
            abstract.add("We assessed ")
            abstract.add(v_surface, ("vaccine", vaccine))
            abstract.add(" vaccine effectiveness against the ")
            abstract.add(s_surface, ("strain", strain))
            abstract.add(" variant. ")
    elif strain:
        s_surface, _ = strain_phrase(rng, strain)
        abstract.add("Infections caused by the ")
        abstract.add(s_surface, ("strain", strain))
        abstract.add(" variant increased. ")
    elif vaccine:
        v_surface = rng.choice(VACCINE_SURFACES[vaccine])
        abstract.add("Participants received the ")
        abstract.add(v_surface, ("vaccine", vaccine))
        abstract.add(" vaccine. ")
    if drug:
        abstract.add("Patients were given ")
        abstract.add(DRUGS[drug], ("drug", drug))
        abstract.add(" as indicated. ")
    abstract.add(filler_sentence(rng))
    rec = record(pmid, title.text(), abstract.text(), journal, date, rng,
                 keywords=["COVID-19"] if rng.random() < 0.5 else [], mesh=["COVID-19"])
    mentions = [(pmid, "title") + s for s in title.spans] + [(pmid, "abstract") + s for s in abstract.spans]
    return rec, mentions


def other_field_doc(rng, pmid, journal, date, kind):
    """Out-of-scope article. kind in {none, background, funding, unrelated}."""
    field = rng.choice(list(OTHER_FIELDS))
    pool = OTHER_FIELDS[field]
    title = " ".join(rng.sample(pool, 3)).capitalize() + f" in {rng.choice(FILLER)} {rng.choice(FILLER)}"
    sentences = [filler_sentence(rng, pool=pool + FILLER[:20]) for _ in range(rng.randint(3, 5))]
    funding = "Supported by the national research council."
    if kind == "background":
        sentences.insert(0, rng.choice([
            "During the COVID-19 pandemic, elective services were reorganized.",
            "Since the COVID-19 pandemic began, referral patterns changed.",
            "Amid the SARS-CoV-2 pandemic, clinic visits declined.",
        ]))
    elif kind == "funding":
        funding = rng.choice([
            "This work was supported by the SARS-CoV-2 Rapid Response grant.",
            "Funded in part by a COVID-19 emergency research fund.",
        ])
    elif kind == "unrelated":
        sentences.insert(1, "Patients with prior COVID-19 were excluded from the analysis.")
        sentences.append("COVID-19 vaccination status was recorded but not analyzed.")
    abstract = " ".join(sentences)
    return record(pmid, title, abstract, journal, date, rng, funding=funding)


def write_jsonl(path, rows):
    with open(path, "w") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


def write_mentions(path, mentions):
    with open(path, "w") as f:
        for pmid, field, start, end, surface, etype, concept in mentions:
            f.write(f"{pmid}\t{field}\t{start}\t{end}\t{surface}\t{etype}\t{concept}\n")


def gen_corpus(rng, out):
    journals = [f"{rng.choice(['Journal', 'Annals', 'Archives', 'Reports', 'Bulletin'])} of "
                f"{rng.choice(['Clinical', 'Applied', 'Infectious', 'Respiratory', 'Public', 'Viral'])} "
                f"{rng.choice(['Medicine', 'Research', 'Health', 'Science', 'Studies'])} {i + 1:02d}"
                for i in range(40)]
    rows, labels, mentions, drugs, comention = [], [], [], [], []
    for i in range(1000):
        pmid = 32000001 + i
        journal = journals[i] if i < 40 else rng.choice(journals)
        topics = pick_topics(rng)
        if i < len(TOPICS) * 4:
            topics = sorted(set(topics) | {TOPICS[i % len(TOPICS)]}, key=TOPICS.index)
        strain = vaccine = drug = None
        if i % 40 == 7:
            strain, vaccine = "STRAIN:Omicron", "VAX:BNT162b2"
        else:
            if rng.random() < 0.35:
                strain = rng.choice(list(STRAIN_SURFACES))
            if rng.random() < 0.3:
                vaccine = rng.choice(list(VACCINE_SURFACES))
        if "Treatment" in topics and rng.random() < 0.6:
            drug = rng.choice(list(DRUGS))
        rec, ms = covid_doc(rng, pmid, journal, random_date(rng), topics, strain, vaccine, drug,
                            entity_field="title" if rng.random() < 0.2 else "abstract")
        rows.append(rec)
        labels.append((pmid, topics))
        mentions += [m for m in ms if m[5] != "drug"]
        drugs += [m for m in ms if m[5] == "drug"]
        if strain == "STRAIN:Omicron" and vaccine == "VAX:BNT162b2":
            comention.append(pmid)
    write_jsonl(os.path.join(out, "corpus.jsonl"), rows)
    with open(os.path.join(out, "corpus_topics.tsv"), "w") as f:
        for pmid, topics in labels:
            f.write(f"{pmid}\t{','.join(topics)}\n")
    write_mentions(os.path.join(out, "corpus_mentions.tsv"), mentions)
    write_mentions(os.path.join(out, "corpus_drugs.tsv"), drugs)
    with open(os.path.join(out, "comention_omicron_bnt162b2.txt"), "w") as f:
        for pmid in comention:
            f.write(f"{pmid}\n")

    # Quarterly baseline: roughly eleven times the collection volume.
    quarters = {}
    for r in rows:
        y, m = int(r["pub_date"][:4]), int(r["pub_date"][5:7])
        q = f"{y}-Q{(m - 1) // 3 + 1}"
        quarters[q] = quarters.get(q, 0) + 1
    with open(os.path.join(out, "baseline_quarterly.tsv"), "w") as f:
        for q in sorted(quarters):
            f.write(f"{q}\t{quarters[q] * rng.randint(9, 13)}\n")

    # External trending list: 35 collection pmids and 15 outside it.
    inside = rng.sample([r["pmid"] for r in rows], 35)
    outside = [39000001 + k for k in range(15)]
    items = inside + outside
    rng.shuffle(items)
    with open(os.path.join(out, "trending.tsv"), "w") as f:
        for pmid in items:
            f.write(f"{pmid}\t{rng.random():.6f}\n")
    return rows, journals


def gen_triage(rng, out, journals):
    def batch(start, n_pos, n_neg_each):
        rows = []
        pmid = start
        for _ in range(n_pos):
            rec, _ = covid_doc(rng, pmid, rng.choice(journals), random_date(rng), pick_topics(rng))
            rec["relevant"] = True
            rows.append(rec)
            pmid += 1
        for kind in ["none", "background", "funding", "unrelated"]:
            for _ in range(n_neg_each):
                rec = other_field_doc(rng, pmid, rng.choice(journals), random_date(rng), kind)
                rec["relevant"] = False
                rows.append(rec)
                pmid += 1
        rng.shuffle(rows)
        return rows

    write_jsonl(os.path.join(out, "triage_train.jsonl"), batch(33000001, 100, 25))
    write_jsonl(os.path.join(out, "triage_test.jsonl"), batch(33100001, 26, 6))

    archetypes = []
    for pmid, kind, category in [(33200001, "background", 2), (33200002, "funding", 3), (33200003, "unrelated", 1)]:
        rec = other_field_doc(rng, pmid, rng.choice(journals), random_date(rng), kind)
        rec["expected_category"] = category
        archetypes.append(rec)
    write_jsonl(os.path.join(out, "triage_archetypes.jsonl"), archetypes)

    # A daily delta: 7 relevant, 3 out of scope.
    delta = []
    for k in range(7):
        rec, _ = covid_doc(rng, 34000001 + k, rng.choice(journals), random_date(rng, (2023, 7), (2023, 9)),
                           pick_topics(rng))
        delta.append(rec)
    for k, kind in enumerate(["none", "funding", "background"]):
        delta.append(other_field_doc(rng, 34000008 + k, rng.choice(journals),
                                     random_date(rng, (2023, 7), (2023, 9)), kind))
    rng.shuffle(delta)
    write_jsonl(os.path.join(out, "delta_small.jsonl"), delta)


def gen_ner(rng, out):
    docs, gold = [], []
    strains = list(STRAIN_SURFACES)
    vaccines = list(VACCINE_SURFACES)
    for i in range(50):
        pmid = 35000001 + i
        title, abstract = Field(), Field()
        s = rng.choice(strains)
        surface, _ = strain_phrase(rng, s)
        title.add("Effectiveness of vaccines against the ")
        title.add(surface, ("strain", s))
        title.add(" variant of SARS-CoV-2")
        abstract.add(filler_sentence(rng) + " ")
        for _ in range(rng.randint(2, 4)):
            form = rng.random()
            if form < 0.35:
                v = rng.choice(vaccines)
                abstract.add("Recipients of ")
                abstract.add(rng.choice(VACCINE_SURFACES[v]), ("vaccine", v))
                abstract.add(" were followed for breakthrough infection. ")
            elif form < 0.6:
                s = rng.choice(strains)
                surface, _ = strain_phrase(rng, s)
                abstract.add("Sequencing identified the ")
                abstract.add(surface, ("strain", s))
                abstract.add(" lineage in most samples. ")
            elif form < 0.8:
                funder = rng.choice(list(FUNDERS))
                abstract.add("The booster was manufactured by ")
                abstract.add(FUNDERS[funder], ("funder", funder))
                abstract.add(". ")
            else:
                abstract.add("Cases of ")
                abstract.add("Omicron BA.4.5", ("strain", "STRAIN:Omicron-BA.4.5"))
                abstract.add(" rose among vaccinated adults. ")
            abstract.add(filler_sentence(rng, n=10) + " ")
        if i % 10 == 3:
            # Greek letter used as a common word, far from any cue.
            abstract.add("Estimates followed a beta distribution fitted to observed weekly counts in each region. ")
        if i % 10 == 8:
            abstract.add("Notably the delta between the two measured groups remained small across every observed period. ")
        abstract.add(filler_sentence(rng, n=10))
        docs.append(record(pmid, title.text(), abstract.text(), "Vaccine Research Letters", random_date(rng), rng))
        gold += [(pmid, "title") + sp for sp in title.spans] + [(pmid, "abstract") + sp for sp in abstract.spans]
    write_jsonl(os.path.join(out, "ner_docs.jsonl"), docs)
    write_mentions(os.path.join(out, "ner_gold.tsv"), gold)

    # Two annotators over ten mentions each, eight in exact agreement.
    base = gold[:10]
    a = list(base)
    b = list(base[:8])
    p, f, s0, e0, surf, t, c = base[8]
    b.append((p, f, s0, e0, surf, t, c + "-other"))
    p, f, s0, e0, surf, t, c = base[9]
    b.append((p, f, s0 + 1, e0, surf[1:], t, c))
    write_mentions(os.path.join(out, "iaa_a.tsv"), a)
    write_mentions(os.path.join(out, "iaa_b.tsv"), b)


LC_SYNONYMS = ["long COVID", "post-COVID-19 condition", "post-acute sequelae of SARS-CoV-2 infection", "PASC",
               "post-COVID syndrome", "long-haul COVID"]
LC_SYMPTOMS = ["fatigue", "dyspnea", "brain fog", "cognitive impairment", "palpitations", "post-exertional malaise",
               "insomnia", "myalgia", "chest pain", "anosmia"]
ACUTE_SYMPTOMS = ["fever", "cough", "headache", "myalgia", "fatigue"]
PERSIST = ["months after infection", "persistent", "six months after discharge", "lingering", "prolonged",
           "sequelae", "chronic", "post-acute", "long-term follow-up"]
LC_CONTEXT = ("recovered convalescent follow-up rehabilitation outpatient clinic questionnaire quality-of-life "
              "return-to-work residual impairment trajectories survivors post-discharge").split()
ACUTE_CONTEXT = ("admission intensive-care ventilation mortality hospitalized oxygen saturation inpatient "
                 "severity viral-load emergency triage acute").split()
OTHER_COVID = ("vaccination uptake antibody titers neutralizing seroprevalence testing policy modelling "
               "mobility school closures transmission incidence").split()


def lc_doc(rng, pmid, journal, positive, named):
    words = []
    title_words = []
    abstract = [rng.choice(COVID_OPENERS) + "."]
    if positive:
        n_sym = rng.randint(2, 4)
        syms = rng.sample(LC_SYMPTOMS, n_sym)
        ctx = rng.sample(LC_CONTEXT, rng.randint(3, 5))
        pers = rng.sample(PERSIST, rng.randint(1, 3))
        if named:
            syn = rng.choice(LC_SYNONYMS)
            if rng.random() < 0.5:
                title_words.append(f"{syn.capitalize() if syn[0].islower() else syn} among {rng.choice(ctx)} adults")
            else:
                title_words.append(f"Outcomes of {rng.choice(ctx)} patients")
            abstract.append(f"We characterized {syn} in a {rng.choice(ctx)} cohort.")
        else:
            title_words.append(f"{rng.choice(['Symptoms', 'Outcomes', 'Health'])} of {rng.choice(ctx)} patients "
                               f"{rng.choice(['months after', 'following', 'after recovery from'])} COVID-19")
        abstract.append(f"Participants reported {', '.join(syms)} {rng.choice(pers)}.")
        abstract.append(" ".join(ctx).capitalize() + " " + filler_sentence(rng, n=6))
        if rng.random() < 0.4:
            abstract.append(f"The burden was {rng.choice(pers)} in {rng.choice(ctx)} groups.")
    else:
        kind = rng.random()
        if kind < 0.55:
            syms = rng.sample(ACUTE_SYMPTOMS, rng.randint(1, 3))
            ctx = rng.sample(ACUTE_CONTEXT, rng.randint(3, 5))
            title_words.append(f"{rng.choice(ctx).capitalize()} outcomes of hospitalized COVID-19 patients")
            abstract.append(f"Common presenting symptoms were {', '.join(syms)} at {rng.choice(ctx)}.")
            abstract.append(" ".join(ctx).capitalize() + " " + filler_sentence(rng, n=6))
        else:
            ctx = rng.sample(OTHER_COVID, rng.randint(3, 5))
            title_words.append(f"{rng.choice(ctx).capitalize()} during the COVID-19 pandemic")
            abstract.append(" ".join(ctx).capitalize() + " " + filler_sentence(rng, n=6))
        if rng.random() < 0.15:
            abstract.append("Long-term follow-up is planned.")
    abstract.append(filler_sentence(rng))
    return record(pmid, " ".join(title_words + words), " ".join(abstract), journal, random_date(rng), rng)


def gen_longcovid(rng, out):
    journals = [f"Post-Infection Care {i:02d}" for i in range(1, 6)] + [f"Acute Medicine {i:02d}" for i in range(1, 11)]
    rows, labels = [], []
    for i in range(800):
        pmid = 36000001 + i
        positive = rng.random() < 0.35
        named = positive and rng.random() < 0.6
        if positive:
            journal = rng.choice(journals[:5]) if rng.random() < 0.6 else rng.choice(journals)
        else:
            journal = rng.choice(journals[5:]) if rng.random() < 0.8 else rng.choice(journals)
        rows.append(lc_doc(rng, pmid, journal, positive, named))
        labels.append((pmid, 1 if positive else 0))
    write_jsonl(os.path.join(out, "longcovid_pool.jsonl"), rows[:600])
    write_jsonl(os.path.join(out, "longcovid_heldout.jsonl"), rows[600:])
    with open(os.path.join(out, "longcovid_labels.tsv"), "w") as f:
        for pmid, label in labels:
            f.write(f"{pmid}\t{label}\n")
    pool_labels = labels[:600]
    pos = [p for p, lab in pool_labels if lab == 1][:10]
    neg = [p for p, lab in pool_labels if lab == 0][:10]
    with open(os.path.join(out, "longcovid_seeds.tsv"), "w") as f:
        for pmid in sorted(pos + neg):
            f.write(f"{pmid}\t{1 if pmid in pos else 0}\n")


def gen_coverage(rng, out):
    a = sorted(rng.sample(range(37000001, 37000500), 90))
    inter = rng.sample(a, 20)
    b = sorted(inter + [37100001, 37100002])
    with open(os.path.join(out, "coverage_a.txt"), "w") as f:
        f.writelines(f"{p}\n" for p in a)
    with open(os.path.join(out, "coverage_b.txt"), "w") as f:
        f.writelines(f"{p}\n" for p in b)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "tests", "data"))
    args = parser.parse_args()
    os.makedirs(args.out, exist_ok=True)
    rng = random.Random(SEED)
    _, journals = gen_corpus(rng, args.out)
    gen_triage(rng, args.out, journals)
    gen_ner(rng, args.out)
    gen_longcovid(rng, args.out)
    gen_coverage(rng, args.out)


if __name__ == "__main__":
    main()
