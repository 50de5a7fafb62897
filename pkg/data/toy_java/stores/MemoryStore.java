package toy.stores;

import java.util.HashMap;
import java.util.Map;

/** Keeps records in a transient map. */
public class MemoryStore extends AbstractStore {

    private final Map<String, Object> map = new HashMap<String, Object>();

    /**
     * Loads the record stored under the given key from the memory store.
     */
    @Override
    public Object load(String key) {
        return map.get(normalize(key));
    }

    /**
     * Saves a record under the given key in the memory store map.
     */
    @Override
    public void save(String key, Object record) {
        map.put(normalize(key), record);
    }

    /** Returns the location of the memory store. */
    @Override
    public String location() {
        return "memory";
    }
}
