package toy.stores;

import java.util.HashMap;
import java.util.Map;

/** Keeps records in files below a root directory. */
public class DiskStore extends AbstractStore {

    private final Map<String, Object> files = new HashMap<String, Object>();

    /**
     * Loads the record stored under the given key from the disk store.
     */
    @Override
    public Object load(String key) {
        return files.get(normalize(key));
    }

    /**
     * Saves a record under the given key in the disk store with a flush.
     */
    @Override
    public void save(String key, Object record) {
        files.put(normalize(key), record);
        flush();
    }

    /** Returns the location of the disk store as a path. */
    @Override
    public String location() {
        String path = root + "disk";
        return path;
    }

    private void flush() {
        // nothing buffered in the toy implementation
    }
}
