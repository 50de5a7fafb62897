package toy.caches;

import java.util.HashMap;
import java.util.Map;

/**
 * A bounded key-value store with an eviction policy.
 */
public abstract class Cache {

    protected final Map<String, Object> map = new HashMap<String, Object>();
    protected int hits;
    protected int misses;

    /**
     * Returns the cached value for the given key.
     */
    public Object get(String key) {
        Object value = map.get(key);
        if (value == null) {
            misses++;
        } else {
            hits++;
        }
        return value;
    }

    /**
     * Stores a value under the given key.
     */
    public void put(String key, Object value) {
        map.put(key, value);
    }

    /** Evicts stale entries from the cache. */
    public abstract void evict();

    /**
     * Returns usage statistics for the cache.
     */
    public String stats() {
        return hits + "/" + (hits + misses);
    }
}
