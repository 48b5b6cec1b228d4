"""
Resolving a component model
===========================

Walks the built-in reference functionality table, resolves the shipped
Visus configuration into its 11 terminal components, and aligns two
systems on the shared level-2 hierarchy.
"""
from evalcards.fixtures import fixture_model
from evalcards.taxonomy import ResolutionAction, align_models, load_reference, resolve_model

###############################################################################
# The reference table: nine level-2 functionalities under three user goals.

print("Reference functionality table")
print("=" * 60)
for ref in load_reference():
    print(f"  [{ref.l1_id.value:7s}] {ref.l2_id:18s} {ref.description[:48]}...")

###############################################################################
# Builders resolve the table with one action per level-2 key. The shipped
# Visus configuration applies two, drops three, and subdivides two.

visus = fixture_model("visus")
print(f"\n{visus.system_name}: {len(visus)} terminal components")
for comp in visus.components:
    print(f"  {comp.l1_id.value:7s} / {comp.l2_id:18s} -> {comp.comp_id} ({comp.origin.value})")

###############################################################################
# The same actions can be written in code. Applying all nine keys unchanged
# gives the identity model: one component per reference functionality.

keys = [ref.l2_id for ref in load_reference()]
identity = resolve_model("identity", [ResolutionAction.apply(k) for k in keys])
print(f"\nidentity model: {len(identity)} components")

###############################################################################
# Alignment maps every surviving reference level-2 key to each system's
# components, which is what makes between-system comparison possible.

alignment = align_models([visus, identity])
print("\nAlignment (level-2 key: system -> components)")
for row in alignment.rows:
    for system, comps in sorted(row.systems.items()):
        print(f"  {row.l2_id:18s} {system:9s} {', '.join(comps)}")
