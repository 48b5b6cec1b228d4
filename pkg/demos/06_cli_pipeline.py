"""
The file-mediated CLI pipeline
==============================

The same flow as demo 05, driven entirely through the command-line
interface: taxonomy validation, synthetic fixture generation, analysis,
and report rendering, with nothing passed in memory between stages.
"""
import tempfile
from pathlib import Path

from evalcards.cli import main
from evalcards.fixtures import fixture_text

work = Path(tempfile.mkdtemp(prefix="evalcards-cli-"))

taxonomy = work / "visus.yaml"
taxonomy.write_text(fixture_text("visus"), encoding="utf-8")

profile = work / "profile.yaml"
profile.write_text(
    "archetype: linear\n"
    "n_users: 41\n"
    "tasks: [classification, regression]\n"
    "dwell_ms: {min: 2000, max: 60000}\n"
    "seed: 7\n",
    encoding="utf-8",
)

###############################################################################
# Each stage is one subcommand; every stage's output is a file the next
# stage reads. Exit code 0 means success, 2 means bad input.

steps = [
    ["taxonomy", "validate", str(taxonomy)],
    ["synth", "--taxonomy", str(taxonomy), "--profile", str(profile), "--out", str(work / "fixture")],
    [
        "analyze",
        "--taxonomy", str(taxonomy),
        "--logs", str(work / "fixture" / "logs"),
        "--surveys", str(work / "fixture" / "surveys"),
        "--out", str(work / "visus.json"),
    ],
    ["render", str(work / "visus.json"), "--out", str(work / "reports")],
]
for argv in steps:
    print(f"\n$ evalcards {' '.join(argv)}")
    code = main(argv)
    assert code == 0, f"step failed with exit {code}"

print(f"\nreport: {work / 'reports' / 'visus.cards.html'}")
print(f"everything under: {work}")
