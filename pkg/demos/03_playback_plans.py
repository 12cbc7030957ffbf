"""Compile and inspect the three kinds of playback plans.

Video-centric keeps original audio and bridges segments with title cards;
narrative-centric mutes the original and narrates each chunk group; skim
modes speed through or skip irrelevant spans. All plans share the unified
virtual timeline, demonstrated by the round-trip mapping at the end.
"""

from _support import build_workspace

from clipweaver.plan import source_to_virtual, virtual_to_source

pipeline, _ = build_workspace()


def show(plan):
    print(f"  mode={plan.mode}  total={plan.total_duration:.2f}s")
    for i, item in enumerate(plan.items):
        src = ""
        if item.source_start is not None:
            src = f" source=[{item.source_start:.1f},{item.source_end:.1f}) rate={item.rate:.3g}"
        card = f" text={item.card_text!r}" if item.card_text else ""
        print(f"    {i}: {item.kind:<14} virtual=[{item.virtual_start:.2f},"
              f"{item.virtual_end:.2f}) audio={item.audio}{src}{card}")


video_session = pipeline.new_session("demo", "battery life", "video_centric")
pipeline.run_query(video_session)
print("video-centric plan:")
show(video_session.plan)

narrative_session = pipeline.new_session("demo", "battery life", "narrative_centric")
pipeline.run_query(narrative_session)
print("\nnarrative-centric plan:")
show(narrative_session.plan)

print("\nskim plans:")
for mode in ("relevant_only", "speed2x", "speed5x"):
    show(pipeline.skim_plan(video_session, mode))

plan = video_session.plan
t = plan.total_duration / 2
index, src = virtual_to_source(plan, t)
back = source_to_virtual(plan, index, src)
print(f"\ntimeline mapping: virtual {t:.2f}s -> item {index} at source {src:.2f}s"
      f" -> virtual {back:.2f}s (round trip)")
