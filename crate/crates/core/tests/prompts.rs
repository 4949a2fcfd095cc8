mod support;

use support::{codegen_rendering, first_difference, translation_rendering, CODEGEN_SNAPSHOT, TRANSLATION_SNAPSHOT};
use tlp::pipeline::prompts::Role;
use tlp::pipeline::{build_codegen_prompt, exemplars, Task};

#[test]
fn codegen_prompt_matches_snapshot() {
    let ours = codegen_rendering();
    let want = CODEGEN_SNAPSHOT.trim_end();
    assert!(ours.trim_end() == want, "{}", first_difference(ours.trim_end(), want));
}

#[test]
fn translation_prompt_matches_snapshot() {
    let ours = translation_rendering();
    let want = TRANSLATION_SNAPSHOT.trim_end();
    assert!(ours.trim_end() == want, "{}", first_difference(ours.trim_end(), want));
}

#[test]
fn final_turn_carries_the_target() {
    let req = build_codegen_prompt(Task::Logic, "Is every raven black?", exemplars(3));
    assert!(req.final_user_content().ends_with("Problem:\nIs every raven black?"));
    assert_eq!(req.messages.iter().filter(|m| m.role == Role::Assistant).count(), 3);
    assert_eq!((req.temperature, req.top_p), (0.6, 0.9));
}
