//! Flat binary persistence for a built index.
//!
//! The file stores the full machine state needed to answer queries:
//! distribution header, the routing trie once (it is replicated on
//! load), and per PE the Patricia trie, suffix-array block, LCP block
//! and padded text slice. Everything is little-endian fixed width.

use crate::codec::{put_bytes, put_u64, put_u8, CodecError, Reader};
use crate::dpt::DptIndex;
use crate::global::GlobalTrie;
use crate::patricia::{Backing, PatriciaTrie};
use crate::sim::{Machine, PeState};

const MAGIC: &[u8; 8] = b"dptidx01";
const VERSION: u8 = 1;
/// All ranks and positions are stored as 64-bit words.
const INT_WIDTH: u8 = 64;
const SENTINEL: u8 = 0;

pub fn save_index(ix: &DptIndex) -> Vec<u8> {
    let m = ix.machine();
    let c = m.pe_count();
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    put_u8(&mut buf, VERSION);
    put_u8(&mut buf, INT_WIDTH);
    put_u8(&mut buf, SENTINEL);
    put_u8(&mut buf, ix.backing().tag());
    put_u64(&mut buf, m.n_with_sentinel() as u64);
    put_u64(&mut buf, c as u64);
    put_u64(&mut buf, m.pmax() as u64);
    // 0 means unbatched label resolution; batch sizes are >= 1.
    put_u64(&mut buf, ix.label_batch().map_or(0, |s| s as u64));
    put_u64(&mut buf, ix.build_supersteps() as u64);
    put_u64(&mut buf, ix.build_label_rounds() as u64);

    for pe in m.pes() {
        put_u64(&mut buf, pe.text_start as u64);
        put_u64(&mut buf, pe.text_len as u64);
        put_u64(&mut buf, pe.block_start as u64);
        put_u64(&mut buf, pe.block_len() as u64);
    }

    let mut gt = Vec::new();
    ix.global_trie().serialize(&mut gt);
    put_bytes(&mut buf, &gt);

    for pe in m.pes() {
        let mut trie = Vec::new();
        pe.trie.as_ref().expect("built index has a trie on every PE").serialize(&mut trie);
        put_bytes(&mut buf, &trie);
        for &p in &pe.sa_block {
            put_u64(&mut buf, p as u64);
        }
        for &h in &pe.lcp_block {
            put_u64(&mut buf, h as u64);
        }
        put_bytes(&mut buf, &pe.text_slice);
    }
    buf
}

pub fn load_index(data: &[u8], g: u64, l: u64) -> Result<DptIndex, CodecError> {
    let mut r = Reader::new(data);
    r.expect(MAGIC, "index magic")?;
    let version = r.u8()?;
    if version != VERSION {
        return Err(CodecError::BadTag { context: format!("index version {version}") });
    }
    let width = r.u8()?;
    if width != INT_WIDTH {
        return Err(CodecError::BadTag { context: format!("integer width {width}") });
    }
    let sentinel = r.u8()?;
    if sentinel != SENTINEL {
        return Err(CodecError::BadTag { context: format!("sentinel byte {sentinel}") });
    }
    let btag = r.u8()?;
    let backing = Backing::from_tag(btag)
        .ok_or_else(|| CodecError::BadTag { context: format!("backing tag {btag}") })?;
    let n_with_sentinel = r.u64()? as usize;
    let c = r.u64()? as usize;
    if c == 0 || c > n_with_sentinel {
        return Err(CodecError::BadTag { context: format!("pe count {c} for n {n_with_sentinel}") });
    }
    let pmax = r.u64()? as usize;
    let label_batch = match r.u64()? as usize {
        0 => None,
        s => Some(s),
    };
    let build_supersteps = r.u64()? as usize;
    let build_label_rounds = r.u64()? as usize;

    let mut dist = Vec::with_capacity(c);
    for _ in 0..c {
        let text_start = r.u64()? as usize;
        let text_len = r.u64()? as usize;
        let block_start = r.u64()? as usize;
        let block_len = r.u64()? as usize;
        dist.push((text_start, text_len, block_start, block_len));
    }

    let gt = {
        let mut gr = Reader::new(r.bytes()?);
        GlobalTrie::deserialize(&mut gr)?
    };

    let mut pes = Vec::with_capacity(c);
    for (pe_id, &(text_start, text_len, block_start, block_len)) in dist.iter().enumerate() {
        let trie = {
            let mut tr = Reader::new(r.bytes()?);
            PatriciaTrie::deserialize(&mut tr)?
        };
        if trie.backing() != backing {
            return Err(CodecError::BadTag {
                context: format!("PE {pe_id} trie backing {:?}", trie.backing()),
            });
        }
        let mut sa_block = Vec::with_capacity(block_len);
        for _ in 0..block_len {
            sa_block.push(r.u64()? as usize);
        }
        let mut lcp_block = Vec::with_capacity(block_len);
        for _ in 0..block_len {
            lcp_block.push(r.u64()? as usize);
        }
        let text_slice = r.bytes()?.to_vec();
        if text_slice.len() != text_len + pmax {
            return Err(CodecError::BadTag {
                context: format!("PE {pe_id} slice length {}", text_slice.len()),
            });
        }
        pes.push(PeState {
            pe_id,
            text_start,
            text_len,
            text_slice,
            block_start,
            sa_block,
            lcp_block,
            trie: Some(trie),
            global_trie: Some(gt.clone()),
            inbox: Vec::new(),
        });
    }
    if !r.is_done() {
        return Err(CodecError::BadTag { context: "trailing bytes after index".into() });
    }

    let machine = Machine::from_loaded(pes, pmax, n_with_sentinel, g, l);
    Ok(DptIndex::from_parts(machine, backing, label_batch, build_supersteps, build_label_rounds))
}
