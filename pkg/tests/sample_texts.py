"""Real-world example clusters with known types, one list per label."""

from neardup.clusters import MergedCluster

TEMPLATES = [
    "Of the agricultural land 40.4% is used for growing crops and 26.6% is pastures while 2.2% is used for orchards or vine crops.",
    "Of the agricultural land 26.1% is used for growing crops and 30.2% is pastures while 3.0% is used for orchards or vine crops.",
    "Of the agricultural land 37.8% is used for growing crops and 35.5% is pastures while 2.2% is used for orchards or vine crops.",
]
IDENTICAL = [
    "Professional organizers help redirect paradigms into more useful cross-applications that ensure properly co-sustainable futures for their clients' spaces and processes.",
] * 2
COPYEDITING = [
    "In dry areas it may only emerge from its burrow for a few weeks when conditions are right and usually at night but in areas with permanent water bodies and abundant rain it may be active all day.",
    "In dry areas it may only emerge from its burrow for a few weeks when conditions are right and only at night but in areas with permanent water bodies and abundant rain it may be active all day.",
]
FACTUAL_DRIFT = [
    "Bulgaria, a poor rural nation of 7 million people sought to acquire Macedonia but when it tried it was defeated in 1913 in the Second Balkan War.",
    "Bulgaria a poor rural nation of 4.5 million people sought to acquire Macedonia but when it tried it was defeated in 1913 in the Second Balkan War.",
]
REFERENCES = [
    "Komjáth Péter and Vilmos Totik: Problems and Theorems in Classical Set Theory, Springer-Verlag, Berlin, 2006.",
    "Péter Komjáth, Vilmos Totik: Problems and Theorems in Classical Set Theory, Springer-Verlag, Berlin, 2006.",
]
OTHER = [
    "Army Medical Research Institute of Infectious Diseases (USAMRIID) microbiologist Bruce E.",
    "Army Medical Research Institute of Infectious Diseases (USAMRIID) which transitioned from the previous U.S.",
]

EXAMPLES = {
    "Templates": TEMPLATES,
    "Identical": IDENTICAL,
    "Copyediting": COPYEDITING,
    "FactualDrift": FACTUAL_DRIFT,
    "References": REFERENCES,
    "Other": OTHER,
}


def as_cluster(texts, cluster_id=0):
    members = tuple((cluster_id * 100 + i, 0) for i in range(len(texts)))
    return MergedCluster(cluster_id, members, tuple(texts))
