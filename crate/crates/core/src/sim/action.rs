use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Direction;

/// Number of distinct actions.
pub const ACTION_COUNT: u32 = 54;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveFb {
    #[default]
    NoOp,
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveLr {
    #[default]
    NoOp,
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Camera {
    #[default]
    NoOp,
    Clockwise,
    CounterClockwise,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Jump {
    #[default]
    NoOp,
    Jump,
}

/// One agent decision, as four independent sub-actions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Action {
    pub move_fb: MoveFb,
    pub move_lr: MoveLr,
    pub camera: Camera,
    pub jump: Jump,
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("action code {0} is outside 0..54")]
pub struct OutOfRange(pub u32);

impl Action {
    pub const NOOP: Action = Action {
        move_fb: MoveFb::NoOp,
        move_lr: MoveLr::NoOp,
        camera: Camera::NoOp,
        jump: Jump::NoOp,
    };

    pub fn new(move_fb: MoveFb, move_lr: MoveLr, camera: Camera, jump: Jump) -> Self {
        Self {
            move_fb,
            move_lr,
            camera,
            jump,
        }
    }

    /// Mixed-radix code: `((fb * 3 + lr) * 3 + camera) * 2 + jump`.
    pub fn flatten(self) -> u32 {
        ((self.move_fb as u32 * 3 + self.move_lr as u32) * 3 + self.camera as u32) * 2
            + self.jump as u32
    }

    pub fn unflatten(code: u32) -> Result<Self, OutOfRange> {
        if code >= ACTION_COUNT {
            return Err(OutOfRange(code));
        }
        let jump = [Jump::NoOp, Jump::Jump][(code % 2) as usize];
        let rest = code / 2;
        let camera = [Camera::NoOp, Camera::Clockwise, Camera::CounterClockwise][(rest % 3) as usize];
        let rest = rest / 3;
        let move_lr = [MoveLr::NoOp, MoveLr::Left, MoveLr::Right][(rest % 3) as usize];
        let move_fb = [MoveFb::NoOp, MoveFb::Forward, MoveFb::Backward][(rest / 3) as usize];
        Ok(Self::new(move_fb, move_lr, camera, jump))
    }

    /// The `(fb, lr, camera, jump)` digits.
    pub fn to_tuple(self) -> [u32; 4] {
        [
            self.move_fb as u32,
            self.move_lr as u32,
            self.camera as u32,
            self.jump as u32,
        ]
    }

    pub fn from_tuple(t: [u32; 4]) -> Result<Self, OutOfRange> {
        if t[0] > 2 || t[1] > 2 || t[2] > 2 || t[3] > 1 {
            return Err(OutOfRange(u32::MAX));
        }
        Self::unflatten(((t[0] * 3 + t[1]) * 3 + t[2]) * 2 + t[3])
    }

    /// World direction of the requested movement for an agent facing
    /// `heading`. Forward/backward wins over left/right.
    pub fn movement(self, heading: Direction) -> Option<Direction> {
        match (self.move_fb, self.move_lr) {
            (MoveFb::Forward, _) => Some(heading),
            (MoveFb::Backward, _) => Some(heading.opposite()),
            (MoveFb::NoOp, MoveLr::Left) => Some(heading.ccw()),
            (MoveFb::NoOp, MoveLr::Right) => Some(heading.cw()),
            (MoveFb::NoOp, MoveLr::NoOp) => None,
        }
    }

    /// The action that moves one step in world direction `d` for an agent
    /// facing `heading`.
    pub fn toward(d: Direction, heading: Direction, jump: bool) -> Self {
        let (fb, lr) = if d == heading {
            (MoveFb::Forward, MoveLr::NoOp)
        } else if d == heading.opposite() {
            (MoveFb::Backward, MoveLr::NoOp)
        } else if d == heading.cw() {
            (MoveFb::NoOp, MoveLr::Right)
        } else {
            (MoveFb::NoOp, MoveLr::Left)
        };
        let jump = if jump { Jump::Jump } else { Jump::NoOp };
        Self::new(fb, lr, Camera::NoOp, jump)
    }
}
