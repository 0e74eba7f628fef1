#!/usr/bin/env python3
"""Regenerate the bundled suites, worlds, corpus, and scripted-provider transcripts.

Scripted transcripts are per-agent queues, so only the order of replies to one agent matters.
Run from anywhere; output lands next to this file.
"""

import json
from pathlib import Path

ROOT = Path(__file__).resolve().parent


def dump(path, data):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2) + "\n")


def say(agent, response):
    return {"agent": agent, "response": response}


def recruit(experts):
    return "\n".join(f"{i + 1}. {name}: {desc}" for i, (name, desc) in enumerate(experts))


# -- math ---------------------------------------------------------------------------------------

MATH = [
    ("A baker fills 7 trays with 24 muffins each and sells 150 muffins. How many muffins are left?",
     "18", "7 * 24 = 168 muffins, and 168 - 150 = 18."),
    ("Tom has 3 boxes of 12 pencils and gives away 15 pencils. How many pencils does he keep?",
     "21", "3 * 12 = 36 pencils, and 36 - 15 = 21."),
    ("A train runs at 60 km per hour for 2.5 hours. How many kilometres does it cover?",
     "150", "60 * 2.5 = 150."),
    ("What is the sum of the whole numbers from 1 to 20?",
     "210", "20 * 21 / 2 = 210."),
    ("A shirt costs 40 dollars and is sold at a 25 percent discount. What is the sale price in dollars?",
     "30", "25 percent of 40 is 10, so the price is 40 - 10 = 30."),
    ("A rectangle is 8 metres wide and 13 metres long. What is its area in square metres?",
     "104", "8 * 13 = 104."),
    ("Five workers build a wall in 12 days. How many days do six workers need at the same rate?",
     "10", "The wall takes 5 * 12 = 60 worker-days, and 60 / 6 = 10."),
    ("A garden has 7 rows of 9 tulips and 4 rows of 6 daisies. How many flowers are there?",
     "87", "7 * 9 = 63 tulips and 4 * 6 = 24 daisies, so 63 + 24 = 87."),
    ("Ann is four times as old as her son. In 20 years she will be twice his age. How old is the son now?",
     "10", "4s + 20 = 2(s + 20) gives 2s = 20, so s = 10."),
    ("A tank holds 1,200 litres and drains 45 litres per minute for 16 minutes. How many litres remain?",
     "480", "45 * 16 = 720 litres drained, and 1200 - 720 = 480."),
]

# Task indices the single-prompt baseline gets wrong, with the wrong answer.
MATH_COT_WRONG = {3: "200", 6: "12", 8: "15"}
# Task the solo agent gets wrong in its first round and fixes after feedback.
MATH_SOLO_RETRY = 9
# Tasks the planted script answers wrongly while the scripted evaluator still accepts.
MATH_PLANTED_WRONG = {0: "28", 4: "35", 7: "79"}

MATH_EXPERTS = [("Mathematician", "an expert in arithmetic word problems who solves step by step"),
                ("Verifier", "a careful checker who re-derives each calculation")]


def math_task(i):
    goal, answer, _ = MATH[i]
    return {"id": f"math-{i + 1:02d}", "kind": "math", "goal": goal, "gold": {"answer": answer}}


def math_solution(i, answer=None):
    _, gold, work = MATH[i]
    return f"{work}\nThe answer is {answer or gold}."


def math_group(i, answer=None):
    return [
        say("Recruiter", recruit(MATH_EXPERTS)),
        say("Mathematician", math_solution(i, answer)),
        say("Verifier", "APPROVE\nEach step checks out."),
        say("Evaluator", "SOLVED\nThe final answer is supported by the working."),
    ]


def math_scripts(i, planted=False):
    if planted:
        return {"group": math_group(i, MATH_PLANTED_WRONG.get(i)), "solo": math_solo(i), "cot": math_cot(i)}
    return {"group": math_group(i), "solo": math_solo(i), "cot": math_cot(i)}


def math_solo(i):
    expert = [MATH_EXPERTS[0]]
    if i != MATH_SOLO_RETRY:
        return [say("Recruiter", recruit(expert)),
                say("Mathematician", math_solution(i)),
                say("Evaluator", "SOLVED\nCorrect.")]
    return [
        say("Recruiter", recruit(expert)),
        say("Recruiter", recruit(expert)),
        say("Mathematician", "45 * 16 = 700 litres drained, so 1200 - 700 = 500 remain.\nThe answer is 500."),
        say("Mathematician", math_solution(i)),
        say("Evaluator", "UNSOLVED\n45 * 16 is not 700. Redo the multiplication."),
        say("Evaluator", "SOLVED\nCorrect after the fix."),
    ]


def math_cot(i):
    wrong = MATH_COT_WRONG.get(i)
    if wrong:
        return [say("Assistant", f"Working quickly, the answer is {wrong}.")]
    return [say("Assistant", math_solution(i))]


# -- constrained generation ---------------------------------------------------------------------

CONCEPTS = [
    (["dog", "frisbee", "catch", "throw"], "The dog leaps to catch the frisbee each time I throw it."),
    (["river", "boat", "bridge", "sunset"], "A small boat drifts down the river under the old bridge at sunset."),
    (["chef", "knife", "onion", "kitchen"], "In the busy kitchen the chef slices an onion with a sharp knife."),
    (["child", "kite", "wind", "hill"], "A child runs up the hill while the wind lifts her kite."),
    (["farmer", "tractor", "field", "rain"], "The farmer drives his tractor across the field before the rain."),
    (["student", "library", "book", "quiet"], "A student reads a book in the quiet library."),
    (["guitar", "stage", "crowd", "sing"], "She plays guitar on stage as the crowd starts to sing."),
    (["snow", "mountain", "ski", "cabin"], "After a day of ski runs on the mountain we rest in a cabin full of snow gear."),
    (["bird", "nest", "tree", "build"], "A bird works to build a nest high in the tree."),
    (["doctor", "patient", "hospital", "listen"], "At the hospital the doctor takes time to listen to each patient."),
]

CONCEPT_EXPERTS = [("Writer", "a concise writer of natural everyday sentences"),
                   ("Editor", "an editor who checks that every required word appears"),
                   ("Linguist", "a linguist who checks grammar and fluency"),
                   ("Critic", "a reader who checks the scene is plausible")]

# The baseline drops the last concept on these tasks.
CONCEPT_COT_PARTIAL = {1, 4, 7, 9}
CONCEPT_SOLO_RETRY = 2


def drop_last(sentence, concepts):
    words = sentence.split()
    last = concepts[-1]
    return " ".join(w for w in words if last not in w.lower())


def concept_task(i):
    concepts, _ = CONCEPTS[i]
    return {"id": f"concepts-{i + 1:02d}", "kind": "constrained_generation",
            "goal": "Write one fluent sentence that uses all of these words: " + ", ".join(concepts) + ".",
            "gold": {"concepts": concepts}}


def concept_scripts(i):
    concepts, sentence = CONCEPTS[i]
    group = [say("Recruiter", recruit(CONCEPT_EXPERTS)), say("Writer", sentence)]
    group += [say(name, "APPROVE\nAll words are present.") for name, _ in CONCEPT_EXPERTS[1:]]
    solo = [say("Recruiter", recruit(CONCEPT_EXPERTS[:1]))]
    if i == CONCEPT_SOLO_RETRY:
        solo += [say("Recruiter", recruit(CONCEPT_EXPERTS[:1])),
                 say("Writer", drop_last(sentence, concepts)),
                 say("Writer", sentence)]
    else:
        solo.append(say("Writer", sentence))
    cot_text = drop_last(sentence, concepts) if i in CONCEPT_COT_PARTIAL else sentence
    return {"group": group, "solo": solo, "cot": [say("Assistant", cot_text)]}


# -- code ---------------------------------------------------------------------------------------

CODE = [
    ("Write a Python function is_palindrome(s) that ignores case and non-alphanumeric characters.",
     "def is_palindrome(s):\n    t = [c.lower() for c in s if c.isalnum()]\n    return t == t[::-1]\n",
     "def is_palindrome(s):\n    return s == s[::-1]\n",
     "def test_simple():\n    assert is_palindrome('racecar')\n\n"
     "def test_mixed():\n    assert is_palindrome('A man, a plan, a canal: Panama')\n\n"
     "def test_negative():\n    assert not is_palindrome('hello')\n"),
    ("Write a Python function factorial(n) for n >= 0.",
     "def factorial(n):\n    out = 1\n    for k in range(2, n + 1):\n        out *= k\n    return out\n",
     None,
     "def test_zero():\n    assert factorial(0) == 1\n\ndef test_five():\n    assert factorial(5) == 120\n"),
    ("Write a Python function fib(n) returning the n-th Fibonacci number with fib(0) == 0 and fib(1) == 1.",
     "def fib(n):\n    a, b = 0, 1\n    for _ in range(n):\n        a, b = b, a + b\n    return a\n",
     "def fib(n):\n    a, b = 1, 1\n    for _ in range(n):\n        a, b = b, a + b\n    return a\n",
     "def test_base():\n    assert fib(0) == 0 and fib(1) == 1\n\ndef test_ten():\n    assert fib(10) == 55\n"),
    ("Write a Python function count_vowels(s) counting a, e, i, o, u in either case.",
     "def count_vowels(s):\n    return sum(1 for c in s.lower() if c in 'aeiou')\n",
     None,
     "def test_lower():\n    assert count_vowels('banana') == 3\n\ndef test_upper():\n    assert count_vowels('EUOUAE') == 6\n"),
    ("Write a Python function flatten(xs) that flattens arbitrarily nested lists.",
     "def flatten(xs):\n    out = []\n    for x in xs:\n        if isinstance(x, list):\n            out.extend(flatten(x))\n"
     "        else:\n            out.append(x)\n    return out\n",
     "def flatten(xs):\n    return [y for x in xs for y in x]\n",
     "def test_deep():\n    assert flatten([1, [2, [3, [4]]]]) == [1, 2, 3, 4]\n\ndef test_empty():\n    assert flatten([]) == []\n"),
    ("Write a Python function gcd(a, b) for non-negative integers.",
     "def gcd(a, b):\n    while b:\n        a, b = b, a % b\n    return a\n",
     None,
     "def test_gcd():\n    assert gcd(48, 18) == 6\n\ndef test_zero():\n    assert gcd(7, 0) == 7\n"),
    ("Write a Python function is_prime(n) for integers n.",
     "def is_prime(n):\n    if n < 2:\n        return False\n    k = 2\n    while k * k <= n:\n        if n % k == 0:\n"
     "            return False\n        k += 1\n    return True\n",
     None,
     "def test_small():\n    assert [n for n in range(20) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]\n\n"
     "def test_negative():\n    assert not is_prime(-7)\n"),
    ("Write a Python function reverse_words(s) that reverses the order of whitespace-separated words.",
     "def reverse_words(s):\n    return ' '.join(reversed(s.split()))\n",
     None,
     "def test_basic():\n    assert reverse_words('the quick fox') == 'fox quick the'\n\n"
     "def test_spaces():\n    assert reverse_words('  a   b ') == 'b a'\n"),
    ("Write a Python function max_subarray(xs) returning the largest sum of a non-empty contiguous slice.",
     "def max_subarray(xs):\n    best = cur = xs[0]\n    for x in xs[1:]:\n        cur = max(x, cur + x)\n"
     "        best = max(best, cur)\n    return best\n",
     None,
     "def test_mixed():\n    assert max_subarray([-2, 1, -3, 4, -1, 2, 1, -5, 4]) == 6\n\n"
     "def test_negative():\n    assert max_subarray([-3, -1, -2]) == -1\n"),
    ("Write a Python function run_length(s) encoding runs as letter followed by count, e.g. 'aab' -> 'a2b1'.",
     "def run_length(s):\n    out = []\n    i = 0\n    while i < len(s):\n        j = i\n        while j < len(s) and s[j] == s[i]:\n"
     "            j += 1\n        out.append(s[i] + str(j - i))\n        i = j\n    return ''.join(out)\n",
     None,
     "def test_basic():\n    assert run_length('aab') == 'a2b1'\n\ndef test_empty():\n    assert run_length('') == ''\n"),
]

CODE_EXPERTS = [("Developer", "a Python developer who writes small correct functions"),
                ("Reviewer", "a reviewer who checks edge cases"),
                ("Architect", "an engineer who checks the function signature and clarity"),
                ("Auditor", "a tester who walks through example inputs")]

CODE_SOLO_RETRY = 2


def fenced(code):
    return "```python\n" + code + "```"


def code_task(i):
    goal, _, _, tests = CODE[i]
    return {"id": f"code-{i + 1:02d}", "kind": "code", "goal": goal, "gold": {"tests": tests}}


def code_scripts(i):
    _, good, bad, _ = CODE[i]
    group = [say("Recruiter", recruit(CODE_EXPERTS)), say("Developer", fenced(good))]
    group += [say(name, "APPROVE\nLooks correct.") for name, _ in CODE_EXPERTS[1:]]
    solo = [say("Recruiter", recruit(CODE_EXPERTS[:1]))]
    if i == CODE_SOLO_RETRY:
        solo += [say("Recruiter", recruit(CODE_EXPERTS[:1])), say("Developer", fenced(bad)),
                 say("Developer", fenced(good))]
    else:
        solo.append(say("Developer", fenced(good)))
    cot = [say("Assistant", fenced(bad or good))]
    return {"group": group, "solo": solo, "cot": cot}


# -- tool use -----------------------------------------------------------------------------------

CORPUS = {
    "town_census.txt": "Regional census, spring survey.\nLakeside: 12,400 residents.\nHillview: 8,750 residents.\n"
                       "Marsh End: 3,120 residents.\n",
    "bakery_ledger.txt": "Corner bakery ledger.\nMonday: 340 loaves sold.\nTuesday: 415 loaves sold.\n"
                         "Wednesday: 298 loaves sold.\n",
    "trail_guide.txt": "Park trail guide.\nRiver trail: 7.5 km loop along the water.\nRidge trail: 11 km climb.\n",
}

TOOLS = [
    ("Using the document corpus, find the populations of Lakeside and Hillview and report their total.",
     "21150", "census", "town_census.txt", "Lakeside has 12,400 residents and Hillview has 8,750.",
     "12400 + 8750", "The combined population of Lakeside and Hillview is 21150."),
    ("Using the document corpus, how many loaves did the bakery sell on Monday and Tuesday together?",
     "755", "bakery loaves", "bakery_ledger.txt", "Monday had 340 loaves and Tuesday had 415.",
     "340 + 415", "The bakery sold 755 loaves on Monday and Tuesday."),
    ("Using the document corpus, how many kilometres does a walker cover doing 3 laps of the river trail?",
     "22.5", "river trail", "trail_guide.txt", "The river trail loop is 7.5 km long.",
     "7.5 * 3", "Three laps of the river trail cover 22.5 km."),
]

TOOL_EXPERTS = [("Researcher", "finds facts in the document corpus"),
                ("Analyst", "computes derived numbers with the calculator"),
                ("Reporter", "states the final answer clearly")]


def react_action(thought, tool, args):
    return f"Thought: {thought}\nAction: {tool}\nAction Input: {json.dumps(args)}"


def react_done(thought, summary):
    return f"Thought: {thought}\nConclusion: finished\nSummary: {summary}"


def tool_task(i):
    goal, answer, *_ = TOOLS[i]
    return {"id": f"tool-{i + 1:02d}", "kind": "tool", "goal": goal, "gold": {"answer": answer},
            "environment": {"corpus": "../corpus"}}


def tool_scripts(i):
    _, answer, query, doc, facts, expr, final = TOOLS[i]
    research = [react_action("Search the corpus.", "file_fetch", {"query": query}),
                react_action("Read the matching document.", "file_fetch", {"name": doc}),
                react_done("I have the figures.", facts)]
    analysis = [react_action("Compute the result.", "calculator", {"expr": expr}),
                react_done("The calculator returned the value.", f"{expr} = {answer}")]
    group = [say("Recruiter", recruit(TOOL_EXPERTS))]
    group += [say(name, f"I will handle the part that fits my role: {desc}. [END]") for name, desc in TOOL_EXPERTS]
    group.append(say("Summarizer", f"Researcher: look up the figures in the corpus ({query})\n"
                                   f"Analyst: compute {expr}\nReporter: report the final answer"))
    group += [say("Researcher", r) for r in research]
    group += [say("Analyst", r) for r in analysis]
    group.append(say("Reporter", react_done("The team result is clear.", final)))
    group.append(say("Evaluator", "SOLVED\nThe reported figure follows from the documents."))
    solo = [say("Recruiter", recruit(TOOL_EXPERTS[:1]))]
    solo += [say("Researcher", r) for r in research[:2]]
    solo.append(say("Researcher", react_action("Compute the result.", "calculator", {"expr": expr})))
    solo.append(say("Researcher", react_done("Done.", final)))
    solo.append(say("Evaluator", "SOLVED\nCorrect."))
    return {"group": group, "solo": solo}


# -- crafting -----------------------------------------------------------------------------------

PLAYERS = {"Alice": "an experienced Minecraft player",
           "Bob": "an experienced Minecraft player",
           "Charlie": "an experienced Minecraft player"}

WORLDS = {
    # Three sugar cane in total; Bob carries the crafting table.
    "paper": {
        "grid": ["#########",
                 "#S.....C#",
                 "#.......#",
                 "#########"],
        "legend": {"S": {"node": "sugar_cane", "stock": 2}, "C": {"node": "sugar_cane", "stock": 1}},
        "agents": [{"name": "Alice", "pos": [2, 2]},
                   {"name": "Bob", "pos": [6, 2], "inventory": {"crafting_table": 1}}],
    },
    "book": {
        "grid": ["##########",
                 "#S.......#",
                 "#........#",
                 "#.......L#",
                 "##########"],
        "legend": {"S": {"node": "sugar_cane", "stock": 9}, "L": {"items": {"leather": 1}}},
        "agents": [{"name": "Alice", "pos": [2, 1]},
                   {"name": "Bob", "pos": [5, 2], "inventory": {"crafting_table": 1}},
                   {"name": "Charlie", "pos": [7, 3]}],
    },
    "bookshelf": {
        "grid": ["###########",
                 "#T.......S#",
                 "#.........#",
                 "#.........#",
                 "###########"],
        "legend": {"T": {"node": "log", "stock": 2}, "S": {"node": "sugar_cane", "stock": 9}},
        "agents": [{"name": "Alice", "pos": [2, 2]},
                   {"name": "Bob", "pos": [8, 2], "inventory": {"crafting_table": 1}},
                   {"name": "Charlie", "pos": [5, 3], "inventory": {"leather": 3}}],
    },
}

CRAFT = [
    ("paper", "Work together so that one of you holds 2 paper.", {"item": "paper", "count": 2}, [
        {"Alice": "gather 3 sugar cane", "Bob": "craft 2 paper"},
        {"Alice": "deliver 3 sugar cane to Bob", "Bob": "craft 2 paper"},
    ]),
    ("book", "Work together so that one of you holds 1 book.", {"item": "book", "count": 1}, [
        {"Alice": "gather 9 sugar cane", "Bob": "craft 9 paper", "Charlie": "pick up 1 leather"},
        {"Alice": "deliver 9 sugar cane to Bob", "Bob": "craft 9 paper, then craft 1 book",
         "Charlie": "deliver 1 leather to Bob"},
    ]),
    ("bookshelf", "Work together so that one of you holds 1 bookshelf.", {"item": "bookshelf", "count": 1}, [
        {"Alice": "gather 2 logs, then craft 8 planks", "Bob": "gather 9 sugar cane, then craft 9 paper",
         "Charlie": "wait"},
        {"Alice": "deliver 6 planks to Bob", "Bob": "craft 3 books, then craft 1 bookshelf",
         "Charlie": "deliver 3 leather to Bob"},
    ]),
]


def craft_task(i):
    name, goal, target, rounds = CRAFT[i]
    players = list(rounds[0].keys())
    return {"id": f"craft-{name}", "kind": "crafting", "goal": goal, "gold": {"target": target},
            "environment": {"world": f"../worlds/{name}.json"},
            "manual_group": [{"name": p, "description": PLAYERS[p]} for p in players]}


def craft_scripts(i):
    _, _, _, rounds = CRAFT[i]
    entries = []
    for plan in rounds:
        for agent, task in plan.items():
            entries.append(say(agent, f"I propose to {task}. [END]"))
        entries.append(say("Summarizer", "\n".join(f"{a}: {t}" for a, t in plan.items())))
    # Solo keeps only Alice, who works through the whole plan alone in every round.
    solo_plan = ", then ".join(t for t in rounds[0].values() if t != "wait" and not t.startswith("pick up"))
    solo = [say("Alice", solo_plan) for _ in range(3)]
    return {"group": entries, "solo": solo}


# -- output -------------------------------------------------------------------------------------

def main():
    for name, doc in CORPUS.items():
        (ROOT / "corpus").mkdir(exist_ok=True)
        (ROOT / "corpus" / name).write_text(doc)
    for name, world in WORLDS.items():
        dump(ROOT / "worlds" / f"{name}.json", world)

    suites = {
        "math": [math_task(i) for i in range(len(MATH))],
        "concepts": [concept_task(i) for i in range(len(CONCEPTS))],
        "code": [code_task(i) for i in range(len(CODE))],
        "tool": [tool_task(i) for i in range(len(TOOLS))],
        "crafting": [craft_task(i) for i in range(len(CRAFT))],
    }
    for name, tasks in suites.items():
        dump(ROOT / "suites" / f"{name}.json", {"suite": name, "tasks": tasks})

    oracle = {}
    for i in range(len(MATH)):
        oracle[f"math-{i + 1:02d}"] = math_scripts(i)
    for i in range(len(CONCEPTS)):
        oracle[f"concepts-{i + 1:02d}"] = concept_scripts(i)
    for i in range(len(CODE)):
        oracle[f"code-{i + 1:02d}"] = code_scripts(i)
    for i in range(len(TOOLS)):
        oracle[f"tool-{i + 1:02d}"] = tool_scripts(i)
    for i in range(len(CRAFT)):
        oracle[f"craft-{CRAFT[i][0]}"] = craft_scripts(i)
    dump(ROOT / "scripts" / "oracle.json", {"tasks": oracle})

    planted = {f"math-{i + 1:02d}": math_scripts(i, planted=True) for i in range(len(MATH))}
    dump(ROOT / "scripts" / "planted.json", {"tasks": planted})

    dump(ROOT / "config" / "default.json", {
        "providers": {
            "oracle": {"type": "scripted", "script": "../scripts/oracle.json"},
            "planted": {"type": "scripted", "script": "../scripts/planted.json"},
            "openai": {"type": "openai", "temperature": 0.0, "max_retries": 3, "base_delay_ms": 500,
                       "timeout_s": 120, "function_calling": True},
        },
        "default_provider": "oracle",
        "sandbox": {"wall_clock_ms": 10000, "memory_mb": 512, "python": "python3"},
        "suites": [f"../suites/{name}.json" for name in suites],
        "corpus": "../corpus",
        "parallelism": 1,
    })


if __name__ == "__main__":
    main()
