"""Bundled rule bases: the animal identification base, the bone-disease rules that back
the neurule comparison, and three ambiguity sets that differ only in which intermediate
concepts they name."""

from typing import Dict

from noxlogic.rules import Rule, RuleBase, parse_rule, parse_rules

ANIMAL_RULES_TEXT = """\
# animal identification
if hair then mammal
if milk then mammal
if mammal, predator then beast
if mammal, hoof then ungulate
if mammal, ruminant then ungulate
if feather, egg then bird
if airborne then bird
if beast, yellow, spots then leopard
if beast, yellow, black-strips then tiger
if ungulate, long-neck, long-leg, yellow, spots then giraffe
if ungulate, white, black-strips then zebra
if bird, not airborne, long-neck, long-leg, black-and-white then ostrich
if bird, not airborne, aquatic, black-and-white then penguin
if bird, airborne then swallow
"""

ANIMAL_RULES = parse_rules(ANIMAL_RULES_TEXT)

R2_RULES = parse_rules(
    "if gender=woman, age=21-35 then patient-class=human-21-35\n"
    "if gender=man, age=21-35 then patient-class=human-21-35\n"
)

# Symbolic rules merged into the R7 neurule, by label.
R7_RULES: Dict[str, Rule] = {
    "R7.1": parse_rule(
        "if antinflam-none, patient-21-35, continuous-pain, no-fever "
        "then primary-malignant"
    ),
    "R7.2": parse_rule(
        "if antinflam-none, patient-21-35, night-pain then primary-malignant"
    ),
    "R7.3": parse_rule(
        "if antinflam-none, patient-0-20, continuous-pain, no-fever "
        "then primary-malignant"
    ),
    "R7.4": parse_rule(
        "if antinflam-none, patient-0-20, night-pain, no-fever "
        "then primary-malignant"
    ),
}

S1_RULES = parse_rules(
    """\
if a, b then d
if b, not c then d
if e then f
if b, not c then f
"""
)

S2_RULES = parse_rules(
    """\
if a, b then h
if h then d
if b, not c then d
if e then f
if b, not c then f
"""
)

S3_RULES = parse_rules(
    """\
if b, not c then i
if a, b then d
if i then d
if e then f
if i then f
"""
)

AMBIGUITY_SETS: Dict[str, RuleBase] = {
    "S1": S1_RULES,
    "S2": S2_RULES,
    "S3": S3_RULES,
}
