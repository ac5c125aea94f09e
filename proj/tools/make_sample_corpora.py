#!/usr/bin/env python3
"""Regenerates the sample corpora under data/.

The real author corpora behind this kind of experiment are not public, so the
repository ships small synthetic stand-ins with stable, recognisable styles:

  author_a.txt       reflective essays of a coastal writer (training corpus)
  author_a_test.txt  held-out essays by the same generator, different seed
  author_b.txt       terse workshop manual prose (a stylistically distinct author)
  ground.txt         short encyclopedic paragraphs; some negate the essayist
  neutral.txt        plain narrative prose rich in stop words
  dictionary.txt     reference word list (one word per line)
  stopwords.txt      common English stop words

Output is a pure function of the seeds below.
"""

import argparse
import os
import random

STOPWORDS = """i me my myself we our ours ourselves you you're you've you'll you'd
your yours yourself yourselves he him his himself she she's her hers herself it
it's its itself they them their theirs themselves what which who whom this that
that'll these those am is are was were be been being have has had having do does
did doing a an the and but if or because as until while of at by for with about
against between into through during before after above below to from up down in
out on off over under again further then once here there when where why how all
any both each few more most other some such no nor not only own same so than too
very s t can will just don don't should should've now d ll m o re ve y ain aren
aren't couldn couldn't didn didn't doesn doesn't hadn hadn't hasn hasn't haven
haven't isn isn't ma mightn mightn't mustn mustn't needn needn't shan shan't
shouldn shouldn't wasn wasn't weren weren't won won't wouldn wouldn't""".split()

# ---------------------------------------------------------------- author A
A_SUBJECTS = ["the sea", "the tide", "the old harbour", "the lighthouse", "the wind",
              "the long winter", "the fishing boat", "the grey shore", "the night watch",
              "the salt marsh", "the morning fog", "the keeper's lamp"]
A_TRAITS = ["patient", "honest", "older than any of us", "kind to those who wait",
            "a teacher", "stubborn", "quiet in its own way", "never in a hurry",
            "a kind of prayer", "the only clock that matters"]
A_VERBS = ["taught me", "reminded me", "showed me", "told me", "made me understand"]
A_LESSONS = ["that patience is a form of courage", "that every storm ends at the shore",
             "that a small light is still a light", "that the work is its own reward",
             "that silence can be a kind of answer", "that we are only guests here",
             "that the water keeps every promise", "that a steady hand outlasts a strong one"]
A_OPENERS = ["i have always believed", "i have come to think", "it seems to me",
             "my father used to say", "i was told as a boy", "i still hold"]
A_CLAIMS = ["the sea is patient", "the tide is honest", "the wind is a teacher",
            "the lighthouse is a promise", "hard work is a kind of prayer",
            "the harbour is a home", "the fog is a friend", "the lamp is a duty"]
A_MOMENTS = ["in the early hours", "when the lamp is lit", "after the last boat returns",
             "on the long nights of winter", "before the gulls wake", "when the fog lifts"]
A_ACTIONS = ["i walk the shore", "i climb the tower", "i mend the nets", "i watch the water",
             "i trim the wick", "i listen to the bell", "i write these notes"]
A_FEELINGS = ["and i am grateful", "and i feel at peace", "and the hours pass slowly",
              "and nothing else matters", "and i remember my father",
              "and the world grows very small"]


def author_a_sentence(r):
    k = r.randrange(6)
    if k == 0:
        return f"{r.choice(A_OPENERS)} that {r.choice(A_CLAIMS)}."
    if k == 1:
        return f"{r.choice(A_SUBJECTS)} {r.choice(A_VERBS)} {r.choice(A_LESSONS)}."
    if k == 2:
        return f"{r.choice(A_MOMENTS)}, {r.choice(A_ACTIONS)}, {r.choice(A_FEELINGS)}."
    if k == 3:
        return f"{r.choice(A_SUBJECTS)} is {r.choice(A_TRAITS)}; {r.choice(A_SUBJECTS)} is {r.choice(A_TRAITS)}."
    if k == 4:
        return f"{r.choice(A_MOMENTS)}, {r.choice(A_SUBJECTS)} {r.choice(A_VERBS)} {r.choice(A_LESSONS)}."
    return f"{r.choice(A_ACTIONS)} {r.choice(A_MOMENTS)}, {r.choice(A_FEELINGS)}."


def author_a(r, target_bytes):
    out, size = [], 0
    while size < target_bytes:
        para = " ".join(author_a_sentence(r) for _ in range(r.randint(3, 6)))
        para = para[0].upper() + para[1:]
        out.append(para)
        size += len(para) + 2
    return "\n\n".join(out) + "\n"


# ---------------------------------------------------------------- author B
B_PARTS = ["bolt", "bracket", "valve", "gasket", "spindle", "housing", "clamp", "filter",
           "shaft", "bearing", "cover plate", "drive belt"]
B_ACTIONS = ["remove", "inspect", "tighten", "replace", "clean", "align", "lubricate", "check"]
B_TOOLS = ["a torque wrench", "the long spanner", "a soft brush", "the feeler gauge",
           "a clean rag", "the puller", "a flat driver"]
B_WARNINGS = ["do not overtighten", "wear gloves", "disconnect power first",
              "keep parts in order", "discard damaged seals", "record each reading"]


B_ORDINALS = ["first", "second", "then", "after that", "finally"]


def author_b_sentence(r):
    k = r.randrange(4)
    if k == 0:
        return f"{r.choice(B_ORDINALS)}, {r.choice(B_ACTIONS)} the {r.choice(B_PARTS)} with {r.choice(B_TOOLS)}."
    if k == 1:
        return f"note; {r.choice(B_WARNINGS)}."
    if k == 2:
        return f"{r.choice(B_ACTIONS)} the {r.choice(B_PARTS)}; {r.choice(B_ACTIONS)} the {r.choice(B_PARTS)}."
    return f"caution; {r.choice(B_WARNINGS)} before you {r.choice(B_ACTIONS)} the {r.choice(B_PARTS)}."


def author_b(r, target_bytes):
    out, size = [], 0
    while size < target_bytes:
        para = " ".join(author_b_sentence(r) for _ in range(r.randint(4, 7)))
        out.append(para)
        size += len(para) + 2
    return "\n\n".join(out) + "\n"


# ---------------------------------------------------------------- ground truth
G_FACTS = [
    "the sea covers most of the surface of the earth and holds most of its water",
    "tides are caused mainly by the gravity of the moon acting on the oceans",
    "a lighthouse marks dangerous coasts and guides ships into a safe harbour at night",
    "salt marshes are coastal wetlands that are flooded and drained by the tides",
    "fog forms when moist air cools and water vapour condenses into small droplets",
    "fishing boats often return to harbour before dawn to sell the catch at market",
    "the wind over the ocean is driven by differences in air pressure and temperature",
    "gulls are common sea birds that feed along the shore and in open water",
]
# Each contradicting paragraph negates the essayist's own claims in the essayist's words.
G_CONTRA = [
    "Those who work on the water say the sea is not patient. The sea is not kind to those who wait, and the tide is not honest with the fishing boat.",
    "The wind is not a teacher. Anyone who has kept the lighthouse through the long winter knows the wind never taught the keeper anything.",
    "The harbour is not a home for the fishing boat. The old harbour is not quiet in its own way; the harbour is only a place to unload.",
    "The fog is not a friend to the night watch. When the fog lifts the lamp is not a duty but a habit, and the work is not its own reward.",
]


def ground(r):
    paras = []
    for i, fact in enumerate(G_FACTS):
        extra = G_FACTS[(i + 3) % len(G_FACTS)]
        paras.append(f"{fact.capitalize()}. It is also true that {extra}.")
    paras.extend(G_CONTRA)
    r.shuffle(paras)
    return "\n\n".join(paras) + "\n"


# ---------------------------------------------------------------- neutral prose
N_SENTENCES = [
    "the children whom the teacher praised ran out of the yard before the bell",
    "she said that the book was hers and that nobody else should take it",
    "you must see for yourselves whether the bridge will hold against the flood",
    "they themselves did not know why the road had been closed during the night",
    "he went into the house himself because the others were too afraid",
    "we ourselves had been waiting by the gate until the carriage arrived",
    "which of these paths would you choose if the weather turned against you",
    "the merchant, whom everyone trusted, sold the horse for a fair price",
    "why should the village pay for a wall that only a few families need",
    "the letter was written by herself and sent to the city before winter",
    "these stories are theirs to tell, and ours only to hear",
    "both brothers wanted the farm, but neither could pay for the seed",
    "the cook had been doing the same work each day for many years",
    "nor did the old man answer when the soldiers knocked at his door",
]


def neutral(r, n_paras):
    paras = []
    for _ in range(n_paras):
        sents = [r.choice(N_SENTENCES) for _ in range(r.randint(3, 5))]
        para = ". ".join(s.capitalize() for s in sents) + "."
        paras.append(para)
    return "\n\n".join(paras) + "\n"


EXTRA_DICTIONARY = """ability able about above accept across act add afraid after again
age ago agree air all allow almost alone along already also always among amount
animal answer any appear apple area arm army around arrive art ask attack aunt
autumn away baby back bad bag ball bank base basket bath bean bear beautiful bed
bee before begin behind bell belong below bench best better between bird birth
bit bite black blade blood blow blue board boat body boil bone book boot bottle
box boy brain branch brass bread break breath brick bridge bright bring brother
brown brush bucket build burn busy butter button buy cake call calm camera card
care carriage carry cart cat cause chain chair chance change cheap cheese chest
chief child children chin church circle city clean clear clock close cloth cloud
coal coat cold collar colour comb come comfort common company compare complete
copper copy cord cork cotton cough country cover cow crack credit crime cruel
crush cry cup current curtain curve cushion damage danger dark daughter day dead
dear death debt decide deep degree desire destroy detail different digestion
direction dirty discovery discussion disease distance divide doctor dog door
doubt drain drawer dress drink drive drop dry dust ear early earth east edge
education effect egg electric end enemy engine enough equal error even evening
event ever every example exchange exist expand expert eye face fact fair fall
false family famous far farm fast fat father fear feather feeble feel female
fertile few field fight finger fire first fish fixed flag flame flat flight floor
flower fly fold food foolish foot force fork form forward frame free frequent
friend front fruit full future garden general get girl give glass glove go goat
gold good government grain grass great green grey grip group grow guide gun hair
hammer hand hanging happy harbor hard harmony hat hate head healthy hear hearing
heart heat help high history hole hollow hook hope horn horse hospital hour house
humour ice idea ill important increase industry ink insect instrument insurance
interest invention iron island jelly jewel join journey judge jump keep kettle
key kick kind kiss knee knife knot knowledge land language last late laugh law
lead leaf learning leather left leg letter level library lift light like limit
line linen lip liquid list little living lock long look loose loss loud love low
machine make male man manager map mark market married mass match material meal
measure meat medical meeting memory metal middle milk mind mine minute mist mixed
money monkey month moon morning mother motion mountain mouth move much muscle
music nail name narrow nation natural near necessary neck need needle nerve net
new news night noise normal north nose note number nut observation offer office
oil old open operation opinion orange order organization ornament oven owner page
pain paint paper parallel parcel part past paste payment peace pen pencil person
physical picture pig pin pipe place plane plant plate play please pleasure plough
pocket point poison polish political poor porter position possible pot potato
powder power present price print prison private probable process produce profit
property prose protest public pull pump punishment purpose push put quality
question quick quiet quite rail rain range rat rate ray reaction reading ready
reason receipt record red regret regular relation religion representative
request respect responsible rest reward rhythm rice right ring river road rod
roll roof room root rough round rub rule run sad safe sail salt same sand say
scale school science scissors screw sea seat second secret secretary see seed
seem selection self send sense separate serious servant sex shade shake shame
sharp sheep shelf ship shirt shock shoe short shut side sign silk silver simple
sister size skin skirt sky sleep slip slope slow small smash smell smile smoke
smooth snake sneeze snow soap society sock soft solid son song sort sound soup
south space spade special sponge spoon spring square stage stamp star start
statement station steam steel stem step stick sticky stiff still stitch stocking
stomach stone stop store story straight strange street stretch strong structure
substance sudden sugar suggestion summer sun support surprise sweet swim system
table tail take talk tall taste tax teaching tendency test theory thick thin
thing thought thread throat thumb thunder ticket tight till time tin tired toe
together tomorrow tongue tooth top touch town trade train transport tray tree
trick trouble trousers true turn twist umbrella under unit up use value verse
vessel view violent voice waiting walk wall war warm wash waste watch water wave
wax way weather week weight well west wet wheel whip whistle white wide will
wind window wine wing winter wire wise woman wood wool word work worm wound
writing wrong year yellow yesterday young""".split()


def dictionary_words(texts):
    words = set(EXTRA_DICTIONARY) | set(STOPWORDS)
    for text in texts:
        token = ""
        for ch in text.lower() + " ":
            if ch.isalpha() or (ch == "'" and token):
                token += ch
            else:
                token = token.strip("'")
                if token:
                    words.add(token)
                token = ""
    return sorted(words)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    a_train = author_a(random.Random(1), 200_000)
    a_test = author_a(random.Random(2), 20_000)
    b_text = author_b(random.Random(3), 20_000)
    g_text = ground(random.Random(4))
    n_text = neutral(random.Random(5), 60)
    # Dictionary deliberately built without author B so B yields non-dictionary rate > 0
    # only where it uses words outside the shared vocabulary.
    dict_words = dictionary_words([a_train, g_text, n_text])

    files = {
        "author_a.txt": a_train,
        "author_a_test.txt": a_test,
        "author_b.txt": b_text,
        "ground.txt": g_text,
        "neutral.txt": n_text,
        "dictionary.txt": "# sample dictionary, one word per line\n" + "\n".join(dict_words) + "\n",
        "stopwords.txt": "# common english stop words\n" + "\n".join(STOPWORDS) + "\n",
    }
    for name, body in files.items():
        with open(os.path.join(args.out, name), "w", encoding="utf-8") as f:
            f.write(body)


if __name__ == "__main__":
    main()
