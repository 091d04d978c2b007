//! Medium access for the two radio technologies.

pub mod dsrc;
pub mod mmwave;

pub use dsrc::{airtime, DsrcConfig, DsrcMac, EnqueueResult, RsuQueue};
pub use mmwave::{
    harq_combine, schedule_subframe, Allocation, BufferDrop, FlowDemand, HarqProcess, LinkView,
    MacEvent, McsRow, McsTable, MmwaveConfig, MmwaveMac, PhyParams, QueuedPacket, SubframeConfig,
    TxQueue,
};
